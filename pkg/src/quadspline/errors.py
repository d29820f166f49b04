"""Exception types shared across the package."""


class DegenerateEdgeError(ValueError):
    """Two consecutive interpolation points coincide (zero parameter interval)."""


class UnsupportedFaceError(ValueError):
    """A mesh face is not a quadrilateral."""


class UnsupportedMeshError(ValueError):
    """The mesh does not meet a method's structural requirements."""


class MeshStructureError(ValueError):
    """Non-manifold connectivity or inconsistent face orientation."""


class ConstructionError(RuntimeError):
    """A curve-network or patch construction step failed; message carries ids."""


class FitError(ConstructionError):
    """Rank-deficient least-squares system."""
