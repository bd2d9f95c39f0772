"""Multi-resolution weakly-compressible Riemann SPH with fluid-elastic-structure coupling.

The package is organized around the pieces of the scheme:

- :mod:`sphfsi.kernels` -- Wendland C2 kernel and smoothing-length conventions.
- :mod:`sphfsi.geometry` -- lattice fill and composable 2D regions.
- :mod:`sphfsi.particles` -- structure-of-arrays particle containers.
- :mod:`sphfsi.neighbors` -- cell-grid neighbor search, intra- and cross-body pair lists.
- :mod:`sphfsi.correction` -- kernel-gradient correction matrices, blended variant,
  corrected gradient operator and particle-position regularization.
- :mod:`sphfsi.fluid` -- weakly-compressible equation of state, linearized Riemann
  pair interactions, continuity/momentum rate assembly.
- :mod:`sphfsi.solid` -- total-Lagrangian elastic solid with reference-configuration
  correction and Kirchhoff constitutive pipeline.
- :mod:`sphfsi.coupling` -- two-way interface forces via one-sided Riemann states.
- :mod:`sphfsi.stepper` -- dual-criteria time stepping (advection / acoustic / solid).
- :mod:`sphfsi.cases` -- benchmark case definitions and scene construction.
- :mod:`sphfsi.probes`, :mod:`sphfsi.output` -- time-series probes, CSV writers,
  oscillation post-processing.
- :mod:`sphfsi.cli` -- command-line entry point.

Thread count for the compiled inner loops is capped by the ``SPH_FSI_THREADS``
environment variable; results are identical regardless of the setting.
"""

from sphfsi._threads import configure_threads as _configure_threads

_configure_threads()

__version__ = "0.1.0"
