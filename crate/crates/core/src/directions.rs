//! Deterministic direction families.

use std::f64::consts::PI;

use crate::body::Point;

/// m equispaced unit vectors in the plane starting at angle 0.
pub fn uniform_circle(m: usize) -> Vec<Point> {
    (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// m points of the Fibonacci lattice on S², z running from top to bottom.
pub fn fibonacci_sphere(m: usize) -> Vec<Point> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// The standard family for dimension n (2 or 3).
pub fn family(n: usize, m: usize) -> Vec<Point> {
    if n == 2 {
        uniform_circle(m)
    } else {
        fibonacci_sphere(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_and_balanced() {
        for dirs in [uniform_circle(16), fibonacci_sphere(500)] {
            let n = dirs[0].len();
            let mut mean = vec![0.0; n];
            for d in &dirs {
                let s: f64 = d.iter().map(|v| v * v).sum();
                assert!((s - 1.0).abs() < 1e-14);
                for i in 0..n {
                    mean[i] += d[i] / dirs.len() as f64;
                }
            }
            assert!(mean.iter().all(|v| v.abs() < 1e-2));
        }
    }
}
