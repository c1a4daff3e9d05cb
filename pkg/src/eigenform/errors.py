"""Exception hierarchy shared by the synthesis modules."""


class EigenformError(Exception):
    """Base class for every error raised by this package."""


class Singular(EigenformError):
    pass


class NoConvergence(EigenformError):
    pass


class SpecError(EigenformError):
    """Input system or eigenstructure specification is malformed."""


class EigvecNotInImage(EigenformError):
    def __init__(self, index, residual):
        self.index = index
        self.residual = residual
        super().__init__(
            f"eigenvector {index} is not in Im N1(lambda) (residual {residual:.3e})"
        )


class DependentEigvectors(EigenformError):
    pass


class ImageConditionFailed(EigenformError):
    """Im B is not contained in Im(A - lambda I)."""


class SingularShift(ImageConditionFailed):
    """A - lambda I is singular and B is not in its image."""


class ChainUnsolvable(EigenformError):
    def __init__(self, block, link, residual):
        self.block = block
        self.link = link
        self.residual = residual
        super().__init__(
            f"Jordan chain link {link} of block {block} is unsolvable "
            f"(least-squares residual {residual:.3e})"
        )


class SingularShiftSystem(EigenformError):
    pass


class RootComponentZero(SpecError):
    pass


class ZeroComponent(SpecError):
    pass


class DependentPair(SpecError):
    pass


class SingularV(EigenformError):
    pass


class ReducedSystemDegenerate(EigenformError):
    pass


class ZeroDiagonal(SpecError):
    pass


class ZeroGroupConfiguration(EigenformError):
    def __init__(self, group):
        self.group = group
        super().__init__(f"group {group} has a zero local configuration")


class NotSimpleZero(EigenformError):
    pass


class Diverged(EigenformError):
    def __init__(self, time, norm):
        self.time = time
        self.norm = norm
        super().__init__(f"state norm {norm:.3e} exceeded bound at t={time:.4g}")


class ParseError(EigenformError):
    """Malformed input file; ``where`` is a field path or ``line L, column C``."""

    def __init__(self, where, message):
        self.where = where
        super().__init__(f"{where}: {message}")
