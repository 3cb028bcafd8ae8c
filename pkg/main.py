"""
Entry point for the graph matching benchmarks.

Usage: python main.py {synth,dataset,linegraph,check} [flags]
"""
import sys

from src.cli import main

if __name__ == '__main__':
    sys.exit(main())
