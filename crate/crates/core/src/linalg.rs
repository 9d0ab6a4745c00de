//! Small fixed-dimension vector and symmetric-matrix helpers.  Everything in
//! this crate lives in dimension 2 or 3; points are stored as `[f64; 3]` with
//! a trailing zero in 2D.

pub type Point = [f64; 3];

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Point, c: f64) -> Point {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub fn pt2(x: f64, y: f64) -> Point {
    [x, y, 0.0]
}

/// Symmetric matrix in the leading `dim x dim` block.
#[derive(Debug, Clone, Copy)]
pub struct SymMat {
    pub dim: usize,
    pub m: [[f64; 3]; 3],
}

impl SymMat {
    pub fn zero(dim: usize) -> Self {
        SymMat { dim, m: [[0.0; 3]; 3] }
    }

    pub fn add_outer(&mut self, v: Point, w: f64) {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.m[i][j] += w * v[i] * v[j];
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.m[i][j] *= c;
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.m[i][i]).sum()
    }

    /// Eigen-decomposition by cyclic Jacobi rotations.  Returns eigenvalues
    /// sorted descending with matching orthonormal eigenvectors (columns).
    pub fn eigen(&self) -> (Vec<f64>, Vec<Point>) {
        let n = self.dim;
        let mut a = self.m;
        let mut v = [[0.0; 3]; 3];
        for (i, row) in v.iter_mut().enumerate().take(n) {
            row[i] = 1.0;
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off <= 1e-30 * (1.0 + self.trace().abs()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k][p];
                        let vkq = v[k][q];
                        v[k][p] = c * vkp - s * vkq;
                        v[k][q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut pairs: Vec<(f64, Point)> = (0..n)
            .map(|i| {
                let mut col = [0.0; 3];
                for (k, row) in v.iter().enumerate().take(n) {
                    col[k] = row[i];
                }
                (a[i][i], col)
            })
            .collect();
        pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_diagonal() {
        let mut s = SymMat::zero(2);
        s.m = [[3.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0; 3]];
        let (vals, vecs) = s.eigen();
        assert!((vals[0] - 4.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        let v = vecs[0];
        assert!((v[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn jacobi_3d() {
        let mut s = SymMat::zero(3);
        s.m = [[2.0, 0.5, 0.1], [0.5, 1.5, 0.2], [0.1, 0.2, 1.0]];
        let (vals, vecs) = s.eigen();
        // Residual check: S v = lambda v.
        for (lam, v) in vals.iter().zip(vecs.iter()) {
            for i in 0..3 {
                let sv: f64 = (0..3).map(|j| s.m[i][j] * v[j]).sum();
                assert!((sv - lam * v[i]).abs() < 1e-10);
            }
        }
        let t: f64 = vals.iter().sum();
        assert!((t - s.trace()).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        // x^14 on [-1,1]: exact 2/15, degree 14 <= 2*8-1.
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-13);
    }
}
