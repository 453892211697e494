# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

from functools import wraps

import sgtk

from .errors import AuralabError, StageError

logger = sgtk.LogManager.get_logger(__name__)


def stage(name):
    """
    Decorator factory naming a pipeline stage. Any :class:`AuralabError` raised
    while the decorated function executes is re-raised as a :class:`StageError`
    carrying the stage name, unless it already names a stage.

    :param name: The stage name reported on failure.
    :type name: str
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger.debug("Entering stage '%s'" % name)
            try:
                return func(*args, **kwargs)
            except StageError:
                raise
            except AuralabError as error:
                logger.debug("Stage '%s' failed: %s" % (name, error))
                raise StageError(name, error) from error

        return wrapper

    return decorator
