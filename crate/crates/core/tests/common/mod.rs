//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use triphot::optics::{BiphotonOperator, JonesMap};
use triphot::BiphotonState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn g(r: &mut impl Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn random_unitary(r: &mut impl Rng) -> JonesMap {
    // QR-free construction: normalized complex 2-vector plus a global phase.
    let v = [g(r), g(r), g(r), g(r)];
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = C::new(v[0], v[1]) / n;
    let b = C::new(v[2], v[3]) / n;
    let ph = C::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
    JonesMap::new([[a * ph, -b.conj() * ph], [b * ph, a.conj() * ph]])
}

pub fn random_state(r: &mut impl Rng) -> BiphotonState {
    BiphotonState::from_array([0, 1, 2].map(|_| C::new(g(r), g(r)))).unwrap()
}

/// `P^T (j (x) j) P` with `P` the 4x3 isometry onto `{xx, (xy+yx)/sqrt2, yy}`,
/// products ordered `xx, xy, yx, yy`.
pub fn symmetric_restriction(j: &JonesMap) -> BiphotonOperator {
    let idx = |p: usize, q: usize| 2 * p + q;
    let mut kron = vec![vec![C::new(0.0, 0.0); 4]; 4];
    for p in 0..2 {
        for q in 0..2 {
            for s in 0..2 {
                for t in 0..2 {
                    kron[idx(p, q)][idx(s, t)] = j.m[p][s] * j.m[q][t];
                }
            }
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let iso = [[1.0, 0.0, 0.0], [0.0, h, 0.0], [0.0, h, 0.0], [0.0, 0.0, 1.0]];
    let mut out = [[C::new(0.0, 0.0); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let mut acc = C::new(0.0, 0.0);
            for a in 0..4 {
                for b in 0..4 {
                    acc += iso[a][r] * kron[a][b] * iso[b][c];
                }
            }
            out[r][c] = acc;
        }
    }
    BiphotonOperator::new(out)
}

/// Two-mode Fock space truncated at 2 photons per mode; index `3 nx + ny`.
pub struct Modes {
    pub ax: Vec<Vec<C>>,
    pub ay: Vec<Vec<C>>,
}

type M = Vec<Vec<C>>;

fn zeros(n: usize) -> M {
    vec![vec![C::new(0.0, 0.0); n]; n]
}

fn mul(a: &M, b: &M) -> M {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn dag(a: &M) -> M {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for j in 0..n {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

impl Modes {
    pub fn new() -> Self {
        let mut ax = zeros(9);
        let mut ay = zeros(9);
        for nx in 0..3 {
            for ny in 0..3 {
                if nx > 0 {
                    ax[3 * (nx - 1) + ny][3 * nx + ny] = C::new((nx as f64).sqrt(), 0.0);
                }
                if ny > 0 {
                    ay[3 * nx + ny - 1][3 * nx + ny] = C::new((ny as f64).sqrt(), 0.0);
                }
            }
        }
        Self { ax, ay }
    }

    pub fn embed(s: &BiphotonState) -> Vec<C> {
        let mut v = vec![C::new(0.0, 0.0); 9];
        let [c1, c2, c3] = s.amplitudes();
        v[3 * 2] = c1;
        v[3 + 1] = c2;
        v[2] = c3;
        v
    }

    pub fn expect(op: &M, v: &[C]) -> C {
        let mut acc = C::new(0.0, 0.0);
        for i in 0..v.len() {
            for j in 0..v.len() {
                acc += v[i].conj() * op[i][j] * v[j];
            }
        }
        acc
    }

    /// `(S0, S1, S2, S3)` from mode operators.
    pub fn stokes(&self, s: &BiphotonState) -> [f64; 4] {
        let v = Self::embed(s);
        let nx = mul(&dag(&self.ax), &self.ax);
        let ny = mul(&dag(&self.ay), &self.ay);
        let xy = mul(&dag(&self.ax), &self.ay);
        let e_nx = Self::expect(&nx, &v).re;
        let e_ny = Self::expect(&ny, &v).re;
        let e_xy = Self::expect(&xy, &v);
        [e_nx + e_ny, e_nx - e_ny, 2.0 * e_xy.re, 2.0 * e_xy.im]
    }

    /// Normally ordered `(Gxy, Gxx, Gyy)`.
    pub fn correlators(&self, s: &BiphotonState) -> [f64; 3] {
        let v = Self::embed(s);
        let (ax, ay) = (&self.ax, &self.ay);
        let (axd, ayd) = (dag(ax), dag(ay));
        let gxy = mul(&mul(&axd, &ayd), &mul(ay, ax));
        let gxx = mul(&mul(&axd, &axd), &mul(ax, ax));
        let gyy = mul(&mul(&ayd, &ayd), &mul(ay, ay));
        [gxy, gxx, gyy].map(|o| Self::expect(&o, &v).re)
    }
}

/// `exp(i H)` for Hermitian 3x3 `H` by scaling and squaring of a Taylor series.
pub fn expm_i(h: &[[C; 3]; 3]) -> [[C; 3]; 3] {
    let norm: f64 = h.iter().flatten().map(|x| x.norm()).sum();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.1 {
        scale *= 0.5;
        squarings += 1;
    }
    let a: Vec<Vec<C>> = h
        .iter()
        .map(|r| r.iter().map(|x| x * C::new(0.0, scale)).collect())
        .collect();
    let mut term = zeros(3);
    let mut sum = zeros(3);
    for i in 0..3 {
        term[i][i] = C::new(1.0, 0.0);
        sum[i][i] = C::new(1.0, 0.0);
    }
    for k in 1..30 {
        term = mul(&term, &a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    let mut out = [[C::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = sum[i][j];
        }
    }
    out
}
