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

"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument or hyperparameter is outside its allowed range."""


class UndefinedVarianceError(ParameterError):
    """A statistic needs target variance but every truth is identical."""


class ParseError(ValueError):
    """A data file row could not be parsed."""

    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class DomainError(ValueError):
    """A value lies outside the physical domain of its field."""

    def __init__(self, field: str, value, msg: str = "", line: int = None):
        where = f"line {line}: " if line is not None else ""
        detail = f" ({msg})" if msg else ""
        super().__init__(f"{where}{field}={value} is out of range{detail}")
        self.field = field
        self.value = value
        self.line = line


class ModelFormatError(ValueError):
    """A model file is malformed or was written by an incompatible version."""


class EvaluationError(RuntimeError):
    """A fit failed inside a CV fold or grid cell. The cause is chained."""
