//! The 24 single-qubit Clifford unitaries (up to phase). They form a unitary
//! 2-design, so averages of degree-2 polynomials in (V, V*) over them equal
//! the Haar averages exactly.

use crate::C64;

pub type Mat2 = [[C64; 2]; 2];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Equal up to a global phase.
fn same_ray(a: &Mat2, b: &Mat2) -> bool {
    let fa = [a[0][0], a[0][1], a[1][0], a[1][1]];
    let fb = [b[0][0], b[0][1], b[1][0], b[1][1]];
    let k = (0..4).max_by(|&i, &j| fa[i].norm().partial_cmp(&fa[j].norm()).unwrap()).unwrap();
    if fb[k].norm() < 1e-9 {
        return false;
    }
    let phase = fb[k] / fa[k];
    fa.iter().zip(&fb).all(|(x, y)| (x * phase - y).norm() < 1e-9)
}

pub fn single_qubit_cliffords() -> Vec<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let had = [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]];
    let s = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, 1.0)]];
    let id = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    let mut group = vec![id];
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for u in &frontier {
            for g in [&had, &s] {
                let v = mul(g, u);
                if !group.iter().any(|w| same_ray(w, &v)) {
                    group.push(v);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    group
}
