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

import logging
import functools
from time import perf_counter
from typing import Callable

def debug_timer(func: Callable) -> Callable:
    """Debug timer decorator. Outputs to the log at DEBUG level."""
    @functools.wraps(func)
    def timer(*args, **kwargs):
        init_time = perf_counter()
        ret = func(*args, **kwargs)
        total_time = perf_counter() - init_time
        logging.debug(f"TIMER: {func.__name__} : {total_time:.4f}")
        return ret
    return timer
