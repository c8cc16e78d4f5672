#           Cp Surrogate
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; either version 2 of the License, or
#  (at your option) any later version.
#
#  This program is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with this program; if not, write to the Free Software
#  Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston,
#  MA 02110-1301, USA.

import os
import sys
import time
import platform
import traceback
import logging

LOG_FORMAT = "%(levelname)s [%(funcName)s]: %(message)s"

def log_sys_info(version: str) -> None:
    """Logs system info."""
    logging.info(f"Build: {version}")
    logging.info(time.ctime())
    logging.info(platform.platform())
    logging.info(f"Python Version: {platform.python_version()}")
    logging.info(f"Directory: {os.getcwd()}")

def exception_handler_hook(ex_type, ex_val, ex_tb):
    """Extend the exception handler to log unhandled exceptions"""
    logging.critical("Unhandled exception: ", exc_info = (ex_type, ex_val, ex_tb))
    print(''.join(traceback.format_exception(ex_type, ex_val, ex_tb)), file = sys.stderr)

def init_logging(log_level: int = logging.INFO, log_file: str = None, version: str = "") -> None:
    """
    Configure the root logger. With a log file the log is rewritten on every
    run. Without one, or if the file can't be opened, records go to stderr
    so stdout stays machine readable.
    """

    # drop handlers from an earlier call (tests invoke main() repeatedly)
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    if log_file:
        try:
            logging.basicConfig(filename = log_file, level = log_level, filemode = 'w', format = LOG_FORMAT)
        except OSError as e:
            logging.basicConfig(stream = sys.stderr, level = log_level, format = LOG_FORMAT)
            logging.error(e)
    else:
        logging.basicConfig(stream = sys.stderr, level = log_level, format = LOG_FORMAT)
    sys.excepthook = exception_handler_hook
    logging.info("LOG START")
    log_sys_info(version)
