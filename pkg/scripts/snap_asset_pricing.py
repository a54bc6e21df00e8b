#!/usr/bin/env python
u"""
snap_asset_pricing.py
Runs the pseudo-Siamese asset pricing pipeline from the command line

CALLING SEQUENCE:
    python snap_asset_pricing.py simulate --config=run.yaml --out=run
    python snap_asset_pricing.py train --config=run.yaml --out=run
    python snap_asset_pricing.py train --masked --config=run.yaml --out=run
    python snap_asset_pricing.py evaluate --exclude-microcap=0.2 --out=run
    python snap_asset_pricing.py test-alpha --config=run.yaml --out=run
    python snap_asset_pricing.py cluster --elbow --config=run.yaml --out=run
    python snap_asset_pricing.py importance --threads=4 --out=run
    python snap_asset_pricing.py report --out=run

COMMAND LINE OPTIONS:
    see snap_toolkit/cli.py or --help

UPDATE HISTORY:
    Written 10/2026
"""
import sys
from snap_toolkit.cli import main

#-- run main program
if __name__ == '__main__':
    sys.exit(main())
