"""Main module of the project.

This module runs the spoofguard command line. Each subcommand is one stage of the
countermeasure workflow.

Usage:
    python3 main.py synth --seed 7 --bonafide 80 --spoof 80 --dev-fraction 0.375 --out corpus
    python3 main.py featurize --protocol corpus/train.txt corpus/dev.txt --height 64 --width 64 --out feats
    python3 main.py train --preset tiny --protocol corpus/train.txt --dev-protocol corpus/dev.txt \
        --features feats --weights runs/tiny.sgw
    python3 main.py score --protocol corpus/dev.txt --features feats --weights runs/tiny.sgw --out runs/dev.scores
    python3 main.py evaluate --protocol corpus/dev.txt --scores runs/dev.scores
"""

import sys

from spoofguard.cli import main

if __name__ == "__main__":
    sys.exit(main())
