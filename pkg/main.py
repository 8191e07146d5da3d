#!/usr/bin/env python3
"""
tracebound - provable bounds on Frobenius trace statistics

Entry point: sets up logging and hands the command line to tracebound.cli.
"""

import sys
import logging
import os
from datetime import datetime
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from tracebound.cli import build_parser, run


def setup_logging(log_level: str = "WARNING"):
    """Setup logging configuration; reports own stdout, so the console log goes to stderr"""
    Path("logs").mkdir(exist_ok=True)

    numeric_level = getattr(logging, log_level.upper(), logging.WARNING)

    logging.basicConfig(
        level=numeric_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(f'logs/tracebound_{datetime.now().strftime("%Y%m%d")}.log'),
            logging.StreamHandler(sys.stderr)
        ]
    )

    try:
        import colorlog
        handler = colorlog.StreamHandler(sys.stderr)
        handler.setFormatter(colorlog.ColoredFormatter(
            '%(log_color)s%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%H:%M:%S'
        ))
        logging.getLogger().handlers[1] = handler
    except ImportError:
        pass

    logger = logging.getLogger(__name__)
    logger.info(f"Logging initialized at level: {log_level}")


def main():
    """Main entry point"""
    args = build_parser().parse_args()
    setup_logging(args.log_level or os.getenv("LOG_LEVEL", "WARNING"))
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
