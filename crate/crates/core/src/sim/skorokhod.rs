//! Post-hoc reconstruction of the reflection terms from wealth and benchmark
//! paths, using the running-maximum solution of the Skorokhod problem.

/// L_k = max(0, max_{j<=k} -(x0 + Y_j)) with free increments
/// Y_j = (V_j - v0) - (Z_j - z0).
pub fn local_time(v0: f64, z0: f64, v: &[f64], z: &[f64]) -> Vec<f64> {
    let x0 = (v0 - z0).max(0.0);
    let mut run = 0.0f64;
    v.iter()
        .zip(z)
        .map(|(vj, zj)| {
            let y = (vj - v0) - (zj - z0);
            run = run.max(-(x0 + y));
            run
        })
        .collect()
}

/// A_k = 0 v max_{j<=k} (Z_j - V_j), the minimal injection keeping V + A >= Z.
pub fn injection(v: &[f64], z: &[f64]) -> Vec<f64> {
    let mut run = 0.0f64;
    v.iter()
        .zip(z)
        .map(|(vj, zj)| {
            run = run.max(zj - vj);
            run
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_worked_path() {
        // V drops by 1 then recovers; benchmark flat at 1, start v0 = 1.5
        let v = [1.5, 0.5, 0.2, 1.0];
        let z = [1.0; 4];
        assert_eq!(local_time(1.5, 1.0, &v, &z), vec![0.0, 0.5, 0.8, 0.8]);
        assert_eq!(injection(&v, &z), vec![0.0, 0.5, 0.8, 0.8]);
    }

    #[test]
    fn initial_shortfall_is_a_lump() {
        let v = [0.5, 0.6, 0.3];
        let z = [1.0; 3];
        assert_eq!(injection(&v, &z), vec![0.5, 0.5, 0.7]);
        assert_eq!(local_time(0.5, 1.0, &v, &z), vec![0.0, 0.0, 0.2]);
    }
}
