"""Versioned coefficient presets for the named simulation settings.

The published settings name process orders but not coefficients, so the
exact vectors below are this package's documented choices. All are
stationary/invertible with clearly non-zero low-lag autocorrelation.
Results that depend on the precise values (small-sample power) should be
read against PRESET_VERSION.

The H2 moving-average signals place their weight on even lags only, so
their lag-1 autocovariances vanish exactly: a single-lag (tau = 1)
estimator is structurally blind to them while a multi-lag estimator sees
lags 2, 4 and 6.
"""

PRESET_VERSION = "1.0"

MA3 = (0.6, 0.4, 0.2)
AR2 = (0.5, -0.3)
AR3 = (0.4, -0.2, 0.1)
ARMA11_AR = (0.8,)
ARMA11_MA = (-0.2,)
ARMA32_AR = (0.3, -0.2, 0.1)
ARMA32_MA = (0.5, 0.3)

# Even-lag-only MA coefficient vectors for the long-range setting.
MA10_EVEN = (0.0, 0.5, 0.0, 0.4, 0.0, 0.3, 0.0, 0.2, 0.0, 0.1)
MA15_EVEN = (0.0, 0.45, 0.0, 0.4, 0.0, 0.35, 0.0, 0.3, 0.0, 0.25,
             0.0, 0.2, 0.0, 0.15, 0.1)
MA20_EVEN = (0.0, 0.4, 0.0, 0.36, 0.0, 0.32, 0.0, 0.28, 0.0, 0.24,
             0.0, 0.2, 0.0, 0.16, 0.0, 0.12, 0.0, 0.08, 0.0, 0.04)

MA1_WEAK = (0.1,)
MA2_WEAK = (0.1, 0.1)
