class SpatialAggregationError(Exception):
    pass


class FieldError(SpatialAggregationError, ValueError):
    """Malformed or unusable field input."""


class FormatError(FieldError):
    pass


class ParseError(FieldError):
    pass


class EmptyFieldError(FieldError):
    pass


class ConfigurationError(SpatialAggregationError, ValueError):
    """Unknown combiner, missing redescription, bad parameter."""


class DegeneracyError(SpatialAggregationError, ValueError):
    pass


class DuplicatePointError(SpatialAggregationError, ValueError):
    pass


class ContractViolation(SpatialAggregationError):
    """A user-supplied procedure broke its documented contract."""


class ContainmentError(SpatialAggregationError, ValueError):
    pass


class IllFormedError(SpatialAggregationError, ValueError):
    pass
