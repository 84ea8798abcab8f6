//! Angle helpers in degrees.

/// Wraps an angle into `[0, 360)`.
pub fn wrap360(angle: f64) -> f64 {
    let r = angle.rem_euclid(360.0);
    // rem_euclid rounds tiny negative inputs up to exactly 360.0
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `(-180, 180]`.
pub fn wrap180(angle: f64) -> f64 {
    let r = wrap360(angle);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Folds a signed difference into `(-90, 90]` by removing whole half turns.
pub fn fold_half_turn(angle: f64) -> f64 {
    let a = wrap180(angle);
    if a > 90.0 {
        a - 180.0
    } else if a <= -90.0 {
        a + 180.0
    } else {
        a
    }
}

/// Circular mean in degrees, in `(-180, 180]`. `None` for an empty input.
pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut c, mut n) = (0.0_f64, 0.0_f64, 0usize);
    for a in angles {
        let r = a.to_radians();
        s += r.sin();
        c += r.cos();
        n += 1;
    }
    if n == 0 {
        return None;
    }
    Some(wrap180(s.atan2(c).to_degrees()))
}
