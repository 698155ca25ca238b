//! Small public datasets used in the examples and acceptance checks.

/// Survival times in days of 72 guinea pigs infected with tubercle bacilli.
pub const GUINEA_PIGS: [f64; 72] = [
    10.0, 33.0, 44.0, 56.0, 59.0, 72.0, 74.0, 77.0, 92.0, 93.0, 96.0, 100.0, 100.0, 102.0, 105.0, 107.0, 107.0,
    108.0, 108.0, 108.0, 109.0, 112.0, 121.0, 122.0, 122.0, 124.0, 130.0, 134.0, 136.0, 139.0, 144.0, 146.0, 153.0,
    159.0, 160.0, 163.0, 163.0, 168.0, 171.0, 172.0, 176.0, 113.0, 115.0, 116.0, 120.0, 183.0, 195.0, 196.0, 197.0,
    202.0, 213.0, 215.0, 216.0, 222.0, 230.0, 231.0, 240.0, 245.0, 251.0, 253.0, 254.0, 255.0, 278.0, 293.0, 327.0,
    342.0, 347.0, 361.0, 402.0, 432.0, 458.0, 555.0,
];

/// Velocities (1000 km/s) of 82 galaxies.
pub const GALAXY: [f64; 82] = [
    9.172, 9.350, 9.483, 9.558, 9.775, 10.227, 10.406, 16.084, 16.170, 18.419, 18.552, 18.600, 18.927, 19.052,
    19.070, 19.330, 19.343, 19.349, 19.440, 19.473, 19.529, 19.541, 19.547, 19.663, 19.846, 19.856, 19.863, 19.914,
    19.918, 19.973, 19.989, 20.166, 20.175, 20.179, 20.196, 20.215, 20.221, 20.415, 20.629, 20.795, 20.821, 20.846,
    20.875, 20.986, 21.137, 21.492, 21.701, 21.814, 21.921, 21.960, 22.185, 22.209, 22.242, 22.249, 22.314, 22.374,
    22.495, 22.746, 22.747, 22.888, 22.914, 23.206, 23.241, 23.263, 23.484, 23.538, 23.542, 23.666, 23.706, 23.711,
    24.129, 24.285, 24.289, 24.366, 24.717, 24.990, 25.633, 26.960, 26.995, 32.065, 32.789, 34.279,
];

/// Daily closing prices of Abbey National shares, 31/7/91 to 8/10/91.
pub const ABBEY_PRICES: [f64; 50] = [
    296.0, 296.0, 300.0, 302.0, 300.0, 304.0, 303.0, 299.0, 293.0, 294.0, 294.0, 293.0, 295.0, 287.0, 288.0, 297.0,
    305.0, 307.0, 304.0, 303.0, 304.0, 304.0, 309.0, 309.0, 309.0, 307.0, 306.0, 304.0, 300.0, 296.0, 301.0, 298.0,
    295.0, 295.0, 293.0, 292.0, 307.0, 297.0, 294.0, 293.0, 306.0, 303.0, 301.0, 303.0, 308.0, 305.0, 302.0, 301.0,
    297.0, 299.0,
];

/// The 49 returns `(p_{t-1} - p_t) / p_{t-1}`.
pub fn abbey_returns() -> Vec<f64> {
    ABBEY_PRICES.windows(2).map(|w| (w[0] - w[1]) / w[0]).collect()
}

pub const NAMES: [&str; 4] = ["guinea_pigs", "galaxy", "abbey_prices", "abbey_returns"];

/// Dataset by name; see [`NAMES`].
pub fn by_name(name: &str) -> Option<Vec<f64>> {
    match name {
        "guinea_pigs" | "guinea-pigs" => Some(GUINEA_PIGS.to_vec()),
        "galaxy" => Some(GALAXY.to_vec()),
        "abbey_prices" => Some(ABBEY_PRICES.to_vec()),
        "abbey_returns" | "abbey" => Some(abbey_returns()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_first_return() {
        assert_eq!(abbey_returns().len(), 49);
        assert_eq!(abbey_returns()[1], (296.0 - 300.0) / 296.0);
        assert!(by_name("galaxy").is_some() && by_name("nope").is_none());
        for name in NAMES {
            assert!(by_name(name).is_some());
        }
    }
}
