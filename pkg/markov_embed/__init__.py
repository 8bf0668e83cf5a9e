# markov-embed - embeddability analysis for stochastic matrices
import logging
import sys

import structlog

__version__ = "0.1.0"

# library default until the CLI calls configure_logging: warnings and up, on stderr
if not structlog.is_configured():
    structlog.configure(
        wrapper_class=structlog.make_filtering_bound_logger(logging.WARNING),
        logger_factory=structlog.PrintLoggerFactory(sys.stderr),
    )
