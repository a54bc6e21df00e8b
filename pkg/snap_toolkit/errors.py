#!/usr/bin/env python
u"""
errors.py
Exception classes raised by the pseudo-Siamese asset pricing toolkit

Each class also derives from the builtin exception that callers would
    catch without knowing about this package (ValueError, IOError, ...)

UPDATE HISTORY:
    Written 10/2026
"""

class SnapError(Exception):
    pass

#-- matrix or tensor dimensions do not agree
class ShapeError(SnapError, ValueError):
    pass

#-- invalid numerical parameter (negative scale, step size, ...)
class ParameterError(SnapError, ValueError):
    pass

#-- empty or otherwise invalid input data
class InputError(SnapError, ValueError):
    pass

#-- zero-variance samples where a dispersion is required
class DegenerateInputError(InputError):
    pass

#-- (stock, month) keys or dates do not line up
class AlignmentError(SnapError, ValueError):
    pass

#-- non-finite values in a computation
class NumericError(SnapError, ArithmeticError):
    def __init__(self, message, diagnostics=None):
        super(NumericError, self).__init__(message)
        self.diagnostics = diagnostics or {}

#-- rank-deficient design matrix
class SingularityError(NumericError):
    pass

#-- malformed input file
class ParseError(SnapError, IOError):
    def __init__(self, message, row=None, column=None):
        if (row is not None) or (column is not None):
            message = '{0} (row {1}, column {2})'.format(message, row, column)
        super(ParseError, self).__init__(message)
        self.row = row
        self.column = column

#-- invalid run configuration
class ConfigError(SnapError, ValueError):
    pass
