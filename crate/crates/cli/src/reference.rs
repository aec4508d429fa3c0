//! Published reference values that the `reproduce` subcommand compares
//! against. One constant per table; rows follow the published layout.

/// Table 1 row: arrival time, seller value, MQ, MQ^0.1, price impact, E[mu_hat].
pub type QualityRow = (u32, f64, f64, f64, f64, f64);

pub const TABLE1_APPLE: [QualityRow; 10] = [
    (1, 0.5135, 3.2592, 1.1509, 0.0561, 185.2150),
    (2, 0.7489, 3.2516, 1.1509, 0.0721, 185.2238),
    (3, 0.9871, 3.2435, 1.1506, 0.0874, 185.2996),
    (4, 1.2273, 3.2354, 1.1503, 0.1022, 185.3871),
    (5, 1.4691, 3.2274, 1.1501, 0.1166, 185.4779),
    (6, 1.7123, 3.2195, 1.1499, 0.1307, 185.5669),
    (7, 1.9566, 3.2117, 1.1496, 0.1444, 185.6473),
    (8, 2.2014, 3.2035, 1.1493, 0.1586, 185.7147),
    (9, 2.4451, 3.1948, 1.1487, 0.1731, 185.7359),
    (10, 2.6843, 3.1832, 1.1471, 0.1869, 185.5862),
];

pub const TABLE1_ALPHABET: [QualityRow; 10] = [
    (1, 0.7381, 4.6863, 1.1880, 0.0879, 135.6279),
    (2, 1.0765, 4.6755, 1.1879, 0.1134, 135.7143),
    (3, 1.4188, 4.6641, 1.1876, 0.1371, 135.8290),
    (4, 1.7640, 4.6525, 1.1872, 0.1602, 135.9517),
    (5, 2.1116, 4.6412, 1.1869, 0.1819, 136.0635),
    (6, 2.4612, 4.6299, 1.1866, 0.2035, 136.1738),
    (7, 2.8123, 4.6186, 1.1863, 0.2250, 136.2715),
    (8, 3.1640, 4.6070, 1.1860, 0.2467, 136.3597),
    (9, 3.5143, 4.5945, 1.1853, 0.2696, 136.4248),
    (10, 3.8581, 4.5779, 1.1836, 0.2907, 136.3411),
];

/// Table 2 row: arrival time, MQ, MQ^0.1, MQ^1, price impact, E[mu_hat].
pub type BeliefRow = (u32, f64, f64, f64, f64, f64);

/// Apple, lower conjecture (case "minus").
pub const TABLE2_MINUS: [BeliefRow; 10] = [
    (1, 3.2765, 1.1514, 9.3008, 0.0747, 182.2220),
    (2, 3.2963, 1.1521, 9.3864, 0.1212, 181.1093),
    (3, 3.3243, 1.1529, 9.5120, 0.1728, 180.1473),
    (4, 3.3596, 1.1538, 9.6727, 0.2279, 179.2896),
    (5, 3.4000, 1.1549, 9.8582, 0.2830, 178.5356),
    (6, 3.4445, 1.1561, 10.0647, 0.3374, 177.8721),
    (7, 3.4898, 1.1574, 10.2765, 0.3880, 177.3117),
    (8, 3.5356, 1.1586, 10.4933, 0.4351, 176.8247),
    (9, 3.5777, 1.1594, 10.6966, 0.4763, 176.3853),
    (10, 3.6161, 1.1591, 10.8899, 0.5133, 175.8701),
];

/// Apple, higher conjecture (case "plus").
pub const TABLE2_PLUS: [BeliefRow; 10] = [
    (1, 3.2763, 1.1514, 9.3202, 0.1737, 188.0503),
    (2, 3.2772, 1.1516, 9.3240, 0.2367, 188.8119),
    (3, 3.2775, 1.1516, 9.3265, 0.2864, 189.3880),
    (4, 3.2778, 1.1515, 9.3288, 0.3251, 189.8009),
    (5, 3.2781, 1.1515, 9.3309, 0.3551, 190.0937),
    (6, 3.2785, 1.1515, 9.3327, 0.3779, 190.2949),
    (7, 3.2787, 1.1515, 9.3339, 0.3955, 190.4307),
    (8, 3.2786, 1.1514, 9.3341, 0.4089, 190.5091),
    (9, 3.2777, 1.1510, 9.3317, 0.4193, 190.5048),
    (10, 3.2740, 1.1496, 9.3206, 0.3307, 189.3370),
];

/// Table 3 row: p, MQ, optimal arrival time (case "minus" beliefs).
pub type RandRow = (f64, f64, u32);

pub const TABLE3_APPLE: [RandRow; 8] = [
    (0.0, 3.6659, 10),
    (0.06, 3.6456, 10),
    (0.07, 3.6422, 10),
    (0.08, 3.6365, 9),
    (0.09, 3.6374, 9),
    (0.1, 3.6384, 9),
    (0.5, 3.6764, 9),
    (1.0, 3.7244, 9),
];

pub const TABLE3_ALPHABET: [RandRow; 8] = [
    (0.0, 5.2687, 10),
    (0.06, 5.2395, 10),
    (0.07, 5.2346, 10),
    (0.08, 5.2263, 9),
    (0.09, 5.2277, 9),
    (0.1, 5.2291, 9),
    (0.5, 5.2851, 9),
    (1.0, 5.3526, 9),
];

/// Table 4 row (spread-plus-fee objective, case "minus" beliefs):
/// rho (0 = risk neutral), fee coefficient of the square family, p,
/// optimal arrival, exchange value, zero-fee market quality.
pub type MechRow = (f64, f64, f64, u32, f64, f64);

pub const TABLE4_APPLE: [MechRow; 4] = [
    (0.0, 0.003, 0.0, 6, 3.553, 3.666),
    (0.01, 0.001, 0.0, 10, 0.999, 1.004),
    (0.5, 0.001, 0.0, 10, 2.598, 2.599),
    (1.5, 0.002, 0.0, 7, 76.001, 80.180),
];

pub const TABLE4_ALPHABET: [MechRow; 4] = [
    (0.0, 0.004, 0.0, 5, 5.064, 5.269),
    (0.01, 0.001, 0.0, 10, 1.002, 1.007),
    (0.5, 0.001, 0.1, 9, 3.313, 3.326),
    (1.5, 0.003, 0.0, 6, 294.589, 318.554),
];

/// Table 5 row (efficiency-minus-fee objective, case "minus" beliefs):
/// rho, fee coefficient of the square family, p, optimal arrival,
/// exchange gain, fee gain, MQ with fee, zero-fee MQ.
pub type FeeGainRow = (f64, f64, f64, u32, f64, f64, f64, f64);

pub const TABLE5_APPLE: [FeeGainRow; 4] = [
    (0.0, 0.24, 0.0, 1, 0.417, 3.546, 3.963, 3.666),
    (0.01, 0.24, 0.0, 1, 0.971, 0.035, 1.006, 1.004),
    (0.5, 0.24, 0.0, 1, 0.466, 2.276, 2.742, 2.599),
    (1.5, 0.23, 0.0, 1, 0.768, 153.904, 154.672, 80.180),
];

pub const TABLE5_ALPHABET: [FeeGainRow; 4] = [
    (0.0, 0.23, 0.0, 1, 2.173, 3.537, 5.710, 5.269),
    (0.01, 0.24, 0.0, 1, 0.974, 0.035, 1.009, 1.007),
    (0.5, 0.24, 0.0, 1, 0.610, 2.981, 3.591, 3.326),
    (1.5, 0.22, 0.0, 1, 5.026, 982.068, 987.094, 318.554),
];
