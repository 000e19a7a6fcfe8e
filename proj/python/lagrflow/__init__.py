"""Explicit incompressible flow maps phi(z, t) = A(t) v(z).

The package wraps the C++ core: a catalog of solution families, each
coupling a spatial profile v(z) with a matching time-dependent column
family A(t) so that the volume factor and the invariant two-form
coefficients stay constant in time.  Build a solution from a catalog or
randomized configuration, evaluate particle positions, velocities, and
vorticity, invert the map for Eulerian fields, and run the verification
checks that certify the construction.

    >>> import lagrflow
    >>> cfg = lagrflow.catalog_config("m3-kirchhoff")
    >>> sol = lagrflow.build_solution(cfg)
    >>> sol.phi([0.3, -0.1, 0.5], 0.7)        # doctest: +SKIP
    >>> sol.verify().passed                   # doctest: +SKIP
"""

from lagrflow._core import (
    CheckResult,
    ConfigError,
    FamilyConfig,
    FamilyInfo,
    NumericError,
    ParseError,
    Solution,
    VerificationReport,
    __version__,
    build_solution,
    catalog_config,
    family_info,
    minor_identity_residuals,
    randomized_config,
    registry,
)

__all__ = [
    "CheckResult",
    "ConfigError",
    "FamilyConfig",
    "FamilyInfo",
    "NumericError",
    "ParseError",
    "Solution",
    "VerificationReport",
    "__version__",
    "build_solution",
    "catalog_config",
    "family_info",
    "load_config",
    "minor_identity_residuals",
    "randomized_config",
    "registry",
]


def load_config(path):
    """Read a JSON configuration file into a FamilyConfig."""
    with open(path, "r", encoding="utf-8") as f:
        return FamilyConfig.from_json(f.read())
