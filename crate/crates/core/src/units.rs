//! dB conversions shared by the pattern and channel modules.

/// Lowest value any power is reported at, in dB. Zero power maps here instead
/// of `-inf` so that cuts and CSV files stay finite.
pub const DB_FLOOR: f64 = -200.0;

pub fn power_to_db(power: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_power_hits_the_floor() {
        assert_eq!(power_to_db(0.0), DB_FLOOR);
        assert_eq!(power_to_db(1e-300), DB_FLOOR);
        assert_eq!(power_to_db(1.0), 0.0);
    }

    #[test]
    fn round_trip() {
        for db in [-80.0, -3.0, 0.0, 12.5] {
            assert!((power_to_db(db_to_power(db)) - db).abs() < 1e-12);
        }
    }
}
