"""Turbulence kinetic energy from wildland-fire sensor streams.

Modules: :mod:`ingest` (CSV parsing, alignment, burn phases),
:mod:`turbulence` (perturbations, TKE, moving average), :mod:`stats`
(correlation, metrics, KDE), :mod:`models` (six regressors and a
kernel elastic-net variant), :mod:`evaluate` (splits, grid search,
comparison), :mod:`report`, :mod:`synth` and :mod:`cli`.
"""

__version__ = "0.1.0"
