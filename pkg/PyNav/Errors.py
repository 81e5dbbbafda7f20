'''
Every failure PyNav raises on purpose is a NavError. The command line maps
these to exit code 1; anything else escaping is a bug.

Outcomes that are flagged rather than fatal (a gated EKF measurement, an
infeasible turn-in-place command, a matcher that did not converge) are
returned as values and never raised.
'''


class NavError(Exception):
    pass


# A numeric input was non-finite or outside the domain of the operation.
class InputDomainError(NavError, ValueError):
    pass


# Parameter blocks that violate their invariants, or scenario files that
# cannot be turned into parameter blocks.
class ConfigurationError(NavError, ValueError):
    pass


# A pose that sits inside an obstacle polygon.
class EmbeddedPoseError(NavError):
    pass


# Too few valid beams to align two scans.
class DegenerateScanError(NavError):
    pass


# A point outside the region where a grid can answer.
class OutOfBoundsError(NavError):
    pass


# All particle weights vanished.
class DegenerateWeightsError(NavError):
    pass


# Start or goal of a plan lies on an untraversable cell.
class BlockedEndpointError(NavError):
    pass


# Start and goal are not connected through traversable cells.
class NoPathError(NavError):
    pass


class InvalidTrajectoryError(NavError):
    pass


# Ground truth touched an obstacle. Carries the time and pose for the report.
class CollisionError(NavError):
    def __init__(self, msg, t = None, pose = None):
        super().__init__(msg)
        self.t = t
        self.pose = pose


class EmptyLogError(NavError):
    pass


class GridFormatError(NavError):
    pass


# Navigation was asked to run before a map exists.
class MissingMapError(NavError):
    pass
