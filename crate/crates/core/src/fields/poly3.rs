//! Real solid harmonics in three dimensions, degree <= 3, as explicit
//! monomial expansions.  Basis ordering for degree l runs m = -l..l in the
//! usual real convention.

use crate::error::Error;
use crate::linalg::Point;
use crate::Result;

#[derive(Clone, Copy)]
struct Mono {
    p: [u8; 3],
    c: f64,
}

fn basis(degree: u32) -> &'static [&'static [Mono]] {
    const L1: [&[Mono]; 3] = [
        &[Mono { p: [0, 1, 0], c: 1.0 }],
        &[Mono { p: [0, 0, 1], c: 1.0 }],
        &[Mono { p: [1, 0, 0], c: 1.0 }],
    ];
    const L2: [&[Mono]; 5] = [
        &[Mono { p: [1, 1, 0], c: 1.0 }],
        &[Mono { p: [0, 1, 1], c: 1.0 }],
        &[
            Mono { p: [0, 0, 2], c: 2.0 },
            Mono { p: [2, 0, 0], c: -1.0 },
            Mono { p: [0, 2, 0], c: -1.0 },
        ],
        &[Mono { p: [1, 0, 1], c: 1.0 }],
        &[Mono { p: [2, 0, 0], c: 1.0 }, Mono { p: [0, 2, 0], c: -1.0 }],
    ];
    const L3: [&[Mono]; 7] = [
        &[Mono { p: [2, 1, 0], c: 3.0 }, Mono { p: [0, 3, 0], c: -1.0 }],
        &[Mono { p: [1, 1, 1], c: 1.0 }],
        &[
            Mono { p: [0, 1, 2], c: 4.0 },
            Mono { p: [2, 1, 0], c: -1.0 },
            Mono { p: [0, 3, 0], c: -1.0 },
        ],
        &[
            Mono { p: [0, 0, 3], c: 2.0 },
            Mono { p: [2, 0, 1], c: -3.0 },
            Mono { p: [0, 2, 1], c: -3.0 },
        ],
        &[
            Mono { p: [1, 0, 2], c: 4.0 },
            Mono { p: [3, 0, 0], c: -1.0 },
            Mono { p: [1, 2, 0], c: -1.0 },
        ],
        &[Mono { p: [2, 0, 1], c: 1.0 }, Mono { p: [0, 2, 1], c: -1.0 }],
        &[Mono { p: [3, 0, 0], c: 1.0 }, Mono { p: [1, 2, 0], c: -3.0 }],
    ];
    match degree {
        1 => &L1,
        2 => &L2,
        3 => &L3,
        _ => unreachable!("basis_size guards the degree"),
    }
}

pub fn basis_size(degree: u32) -> Result<usize> {
    match degree {
        0 => Ok(1),
        1..=3 => Ok(2 * degree as usize + 1),
        _ => Err(Error::invalid(format!(
            "3D harmonic polynomial basis implemented for degree <= 3, got {degree}"
        ))),
    }
}

fn mono_value(m: &Mono, x: Point) -> f64 {
    m.c * x[0].powi(m.p[0] as i32) * x[1].powi(m.p[1] as i32) * x[2].powi(m.p[2] as i32)
}

pub fn value(degree: u32, coeffs: &[f64], x: Point) -> f64 {
    if degree == 0 {
        return coeffs[0];
    }
    basis(degree)
        .iter()
        .zip(coeffs.iter())
        .map(|(monos, c)| c * monos.iter().map(|m| mono_value(m, x)).sum::<f64>())
        .sum()
}

pub fn grad(degree: u32, coeffs: &[f64], x: Point) -> Point {
    let mut g = [0.0; 3];
    if degree == 0 {
        return g;
    }
    for (monos, c) in basis(degree).iter().zip(coeffs.iter()) {
        for m in monos.iter() {
            for axis in 0..3 {
                if m.p[axis] == 0 {
                    continue;
                }
                let mut d = *m;
                d.c *= d.p[axis] as f64;
                d.p[axis] -= 1;
                g[axis] += c * mono_value(&d, x);
            }
        }
    }
    g
}
