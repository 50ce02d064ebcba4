"""Exception types shared across the package."""


class HutchfracError(Exception):
    """Base class for all package errors."""


class DimensionError(HutchfracError, ValueError):
    """Point, map, or metric dimensions do not agree."""


class WordBudgetExceeded(HutchfracError):
    """Enumerating ``|F|**n`` words would exceed the configured cap."""

    def __init__(self, n_maps, depth, budget):
        self.n_maps = n_maps
        self.depth = depth
        self.budget = budget
        super().__init__(
            f"{n_maps}**{depth} words exceeds budget {budget}; lower the depth"
        )


class DomainEscape(HutchfracError):
    """A map sends a point of the working box outside of it."""

    def __init__(self, map_index, point, image):
        self.map_index = map_index
        self.point = point
        self.image = image
        super().__init__(
            f"map {map_index} sends {list(point)} to {list(image)}, outside the domain box"
        )


class NoContraction(HutchfracError):
    """Iteration along a symbol stream failed to settle within the depth cap."""

    def __init__(self, message, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class RemetrizationError(HutchfracError):
    """A remetrized pseudometric could not be built with the requested guarantees."""

    def __init__(self, message, word=None, tail_bound=None):
        self.word = word
        self.tail_bound = tail_bound
        super().__init__(message)


class ConfigError(HutchfracError, ValueError):
    """A JSON configuration could not be parsed into domain objects."""
