//! Local errors of the L-shaped domain study as printed in the reference
//! tables, indexed by the reference element number minus one. Column `d`
//! holds degree `d + 1`.

/// Nonstandard-weight (modified) method.
pub(crate) const MODIFIED: [[f64; 4]; 27] = [
    [0.000601801, 5.04182e-05, 1.29901e-06, 2.883369e-07],
    [0.000283446, 6.21132e-05, 1.20905e-06, 2.76578e-07],
    [0.000146762, 7.00263e-05, 2.9024e-07, 6.435543e-08],
    [0.000686025, 2.92184e-05, 1.48222e-06, 3.39858e-07],
    [0.000545596, 4.58312e-05, 1.17826e-06, 2.51762e-07],
    [0.000283395, 6.21132e-05, 6.05555e-07, 4.05396e-07],
    [0.00051755, 9.94984e-06, 1.08778e-06, 1.31404e-08],
    [0.000686025, 2.92184e-05, 1.48222e-06, 3.88262e-07],
    [0.000601804, 5.04182e-05, 1.29902e-06, 2.21688e-07],
    [0.00060181, 5.04181e-05, 1.2872e-06, 2.21688e-07],
    [0.000686025, 2.92172e-05, 1.4835e-06, 3.88264e-07],
    [0.00051733, 9.9498e-06, 1.0866e-06, 1.314e-08],
    [0.000611872, 1.3364e-06, 1.3318e-07, 8.0571e-09],
    [0.000836335, 1.57323e-05, 1.80754e-06, 4.44328e-07],
    [0.000878226, 3.72123e-05, 1.89706e-06, 4.35895e-07],
    [0.00028344, 6.21132e-05, 6.01375e-07, 4.05395e-07],
    [0.000545587, 4.58312e-05, 1.17428e-06, 2.51762e-07],
    [0.000686024, 2.92184e-05, 1.4833e-06, 3.39858e-07],
    [0.000836335, 1.57323e-05, 1.8075e-06, 3.24344e-07],
    [0.00102394, 2.21364e-06, 2.21263e-06, 5.23526e-07],
    [0.00113068, 2.11816e-05, 2.4426e-06, 5.57253e-07],
    [0.000146762, 7.00265e-05, 2.9033e-07, 6.4355e-08],
    [0.000283446, 6.21111e-05, 1.21903e-05, 2.76578e-07],
    [0.000836335, 1.57323e-05, 1.8075e-06, 4.44328e-07],
    [0.000878226, 3.72123e-05, 1.89706e-06, 4.53976e-07],
    [0.00113068, 2.11816e-05, 2.4426e-06, 6.58725e-07],
    [0.00131677, 2.8449e-06, 2.8445e-06, 3.862272e-07],
];

/// Legendre-type (classical) method.
pub(crate) const CLASSICAL: [[f64; 4]; 27] = [
    [0.00136001, 4.98848e-05, 9.50256e-06, 2.1083e-06],
    [0.00116796, 8.47799e-05, 4.02961e-06, 8.94066e-07],
    [0.000644328, 0.000103328, 1.7648e-06, 3.91563e-07],
    [0.00177759, 0.000151793, 3.35481e-05, 7.443461e-06],
    [0.00168033, 9.26857e-05, 8.33637e-06, 1.849625e-06],
    [0.00116796, 8.47799e-05, 4.02961e-06, 3.597997e-06],
    [0.00417917, 0.00119975, 0.000653253, 0.000380225],
    [0.00177759, 0.000151793, 3.35481e-05, 7.4434e-06],
    [0.00136001, 4.98848e-05, 9.5025e-06, 2.10837e-06],
    [0.00136001, 4.98848e-05, 9.5025e-06, 2.10838e-06],
    [0.00177759, 0.000151793, 3.35481e-05, 7.44342e-06],
    [0.00417917, 0.00119975, 0.000653253, 0.000380225],
    [0.00295143, 0.00128745, 0.000676481, 0.000384855],
    [0.000810902, 0.000195597, 3.54234e-05, 8.47482e-06],
    [0.0011291, 5.36411e-05, 9.6454e-06, 2.3076e-06],
    [0.00116796, 8.47799e-05, 4.0296e-06, 3.59799e-06],
    [0.00168033, 9.26857e-05, 8.3363e-06, 1.84962e-06],
    [0.00177759, 0.000151793, 3.35481e-05, 7.4434e-06],
    [0.000810902, 0.000195597, 3.54234e-05, 8.4748e-06],
    [0.000494571, 9.97282e-05, 1.56367e-05, 3.7409e-06],
    [0.000924513, 5.30707e-05, 5.3995e-06, 1.23179e-06],
    [0.000644328, 0.000103328, 1.7648e-06, 3.9156e-07],
    [0.00116796, 8.47799e-05, 4.0296e-06, 8.94e-07],
    [0.00136001, 4.98848e-05, 9.502e-06, 2.108e-06],
    [0.0011291, 5.36411e-05, 9.6454e-06, 2.3076e-06],
    [0.00092451, 5.30707e-05, 5.3995e-06, 1.231895e-06],
    [0.00104132, 4.47484e-05, 2.4735e-06, 5.9165e-07],
];
