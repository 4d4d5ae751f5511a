"""Flex-O - Main entry point."""
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path for imports - MUST be before local imports
src_path = Path(__file__).parent
sys.path.insert(0, str(src_path))

from shared.constants import APP_NAME, APP_VERSION, DEFAULT_OUT_DIR, EXIT_FAILURE, LOG_FILE_NAME  # noqa: E402


def setup_logging(log_dir: Path, level: str = "INFO") -> None:
    """Log to <out>/flexo.log and to stderr."""
    try:
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers = [logging.FileHandler(log_dir / LOG_FILE_NAME, encoding="utf-8"), logging.StreamHandler()]
        logging.basicConfig(
            level=getattr(logging, level),
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            handlers=handlers,
            force=True,
        )
    except Exception as e:
        print(f"Failed to setup logging: {e}", file=sys.stderr)
        # Fallback to basic logging to stderr
        logging.basicConfig(level=logging.INFO, stream=sys.stderr, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    from app import App, build_parser

    args = build_parser().parse_args(argv)
    setup_logging(Path(args.out) if args.out else DEFAULT_OUT_DIR, args.log_level)
    logger = logging.getLogger(__name__)

    try:
        logger.info("=" * 50)
        logger.info("Starting %s %s: %s", APP_NAME, APP_VERSION, args.command)
        logger.info("=" * 50)
        logger.info("Scenario: %s", args.scenario or "(shipped office-corridor)")
        return App(args).start()

    except Exception as e:
        logger.exception("Fatal error: %s", e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
