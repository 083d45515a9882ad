//! Grid-free reference computations shared by the integration tests.
//!
//! Everything here works in explicit matrices: either on the Lie algebra of
//! left-invariant vector fields, or in the coordinate frame `(∂x, ∂y, ∂z, ∂w)`
//! with finite differences in `x, y`. Nothing is taken from the crate except
//! the state coefficients being compared.

#![allow(dead_code)]

use nalgebra::Matrix4;

pub type M4 = Matrix4<f64>;

/// Coefficients `(u, λ, p, q)` of `ω` in the coframe.
#[derive(Clone, Copy, Debug)]
pub struct Coeffs {
    pub u: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
}

/// `ω(E_i, E_j)` in the left-invariant frame.
pub fn omega_matrix(c: Coeffs) -> M4 {
    let mut w = M4::zeros();
    let mut set = |i: usize, j: usize, v: f64| {
        w[(i, j)] = v;
        w[(j, i)] = -v;
    };
    set(0, 1, c.u);
    set(2, 3, c.lambda);
    set(0, 2, c.p);
    set(1, 3, c.p);
    set(0, 3, c.q);
    set(1, 2, -c.q);
    w
}

/// Columns are `J E_j`.
pub fn j_frame() -> M4 {
    let mut j = M4::zeros();
    j[(1, 0)] = 1.0;
    j[(0, 1)] = -1.0;
    j[(3, 2)] = 1.0;
    j[(2, 3)] = -1.0;
    j
}

fn unit(i: usize) -> nalgebra::Vector4<f64> {
    let mut v = nalgebra::Vector4::zeros();
    v[i] = 1.0;
    v
}

/// Bismut Ricci form `ρ(E_a, E_b) = ½ tr(R^B(E_a, E_b) ∘ J)` of a
/// left-invariant metric, from `[E1, E2] = E3`.
pub fn algebraic_rho(c: Coeffs) -> M4 {
    let w = omega_matrix(c);
    let j = j_frame();
    let g = w * j;
    let g_inv = g.try_inverse().expect("positive metric");

    let bracket = |a: usize, b: usize| -> nalgebra::Vector4<f64> {
        match (a, b) {
            (0, 1) => unit(2),
            (1, 0) => -unit(2),
            _ => nalgebra::Vector4::zeros(),
        }
    };
    let gf = |x: &nalgebra::Vector4<f64>, y: &nalgebra::Vector4<f64>| (x.transpose() * g * y)[0];
    let wf = |x: &nalgebra::Vector4<f64>, y: &nalgebra::Vector4<f64>| (x.transpose() * w * y)[0];

    // dω(X,Y,Z) = −ω([X,Y],Z) + ω([X,Z],Y) − ω([Y,Z],X) on basis vectors
    let d_omega = |a: usize, b: usize, c: usize| {
        -wf(&bracket(a, b), &unit(c)) + wf(&bracket(a, c), &unit(b)) - wf(&bracket(b, c), &unit(a))
    };
    let h = |x: usize, y: usize, z: usize| {
        // −dω(JX, JY, JZ), expanded multilinearly
        let (jx, jy, jz) = (j.column(x), j.column(y), j.column(z));
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    let coef = jx[a] * jy[b] * jz[cc];
                    if coef != 0.0 {
                        s += coef * d_omega(a, b, cc);
                    }
                }
            }
        }
        -s
    };

    // connection coefficients ∇_{E_a} E_b = Σ_k conn[a][b][k] E_k
    let mut conn = [[nalgebra::Vector4::<f64>::zeros(); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut lowered = nalgebra::Vector4::zeros();
            for cc in 0..4 {
                let koszul = 0.5
                    * (gf(&bracket(a, b), &unit(cc)) - gf(&bracket(b, cc), &unit(a)) + gf(&bracket(cc, a), &unit(b)));
                lowered[cc] = koszul - 0.5 * h(a, b, cc);
            }
            conn[a][b] = g_inv * lowered;
        }
    }
    let nabla = |a: usize, v: &nalgebra::Vector4<f64>| -> nalgebra::Vector4<f64> {
        (0..4).fold(nalgebra::Vector4::zeros(), |acc, b| acc + conn[a][b] * v[b])
    };

    let mut rho = M4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            let mut r = M4::zeros();
            for cc in 0..4 {
                let e = unit(cc);
                let br = bracket(a, b);
                let mut col = nabla(a, &nabla(b, &e)) - nabla(b, &nabla(a, &e));
                for k in 0..4 {
                    col -= nabla(k, &e) * br[k];
                }
                r.set_column(cc, &col);
            }
            rho[(a, b)] = 0.5 * (r * j).trace();
        }
    }
    rho
}

/// Analytic coefficient fields for the finite-difference oracle.
pub type FieldFn = fn(f64, f64) -> Coeffs;

/// `e^a(∂_i)` for `e¹ = dx, e² = dy, e³ = dz − x dy, e⁴ = dw`.
fn coframe(x: f64) -> M4 {
    let mut c = M4::identity();
    c[(2, 1)] = -x;
    c
}

/// Columns are `J ∂_i` in coordinates.
pub fn j_coord(x: f64) -> M4 {
    let mut j = M4::zeros();
    j[(1, 0)] = 1.0;
    j[(2, 0)] = x;
    j[(0, 1)] = -1.0;
    j[(3, 1)] = -x;
    j[(3, 2)] = 1.0;
    j[(2, 3)] = -1.0;
    j
}

pub fn omega_coord(f: FieldFn, x: f64, y: f64) -> M4 {
    let c = coframe(x);
    c.transpose() * omega_matrix(f(x, y)) * c
}

/// `g(∂_i, ∂_j) = ω(∂_i, J∂_j)`.
pub fn metric_coord(f: FieldFn, x: f64, y: f64) -> M4 {
    omega_coord(f, x, y) * j_coord(x)
}

const H: f64 = 1e-3;

/// Fourth-order central difference of a matrix-valued map along x or y.
fn diff<F: Fn(f64, f64) -> M4>(f: &F, x: f64, y: f64, axis: usize) -> M4 {
    let at = |s: f64| if axis == 0 { f(x + s, y) } else { f(x, y + s) };
    (at(-2.0 * H) - at(2.0 * H) + (at(H) - at(-H)) * 8.0) / (12.0 * H)
}

/// Derivatives along the four coordinates; z and w directions vanish.
fn coordinate_derivatives<F: Fn(f64, f64) -> M4>(f: &F, x: f64, y: f64) -> [M4; 4] {
    [diff(f, x, y, 0), diff(f, x, y, 1), M4::zeros(), M4::zeros()]
}

/// `H(∂_i, ∂_j, ∂_k) = −dω(J∂_i, J∂_j, J∂_k)`.
pub fn torsion_coord(f: FieldFn, x: f64, y: f64) -> [[[f64; 4]; 4]; 4] {
    let dw = coordinate_derivatives(&|x, y| omega_coord(f, x, y), x, y);
    let d_omega = |i: usize, j: usize, k: usize| dw[i][(j, k)] + dw[j][(k, i)] + dw[k][(i, j)];
    let jc = j_coord(x);
    let mut h = [[[0.0; 4]; 4]; 4];
    for (i, hi) in h.iter_mut().enumerate() {
        for (j, hij) in hi.iter_mut().enumerate() {
            for (k, hijk) in hij.iter_mut().enumerate() {
                let mut s = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            let coef = jc[(a, i)] * jc[(b, j)] * jc[(c, k)];
                            if coef != 0.0 {
                                s += coef * d_omega(a, b, c);
                            }
                        }
                    }
                }
                *hijk = -s;
            }
        }
    }
    h
}

/// `∇^B_{∂_i} ∂_j = Σ_l B[i][(l, j)] ∂_l`, Levi-Civita from Christoffel
/// symbols plus the `−½H` torsion term.
fn bismut_coord(f: FieldFn, x: f64, y: f64) -> [M4; 4] {
    let g = metric_coord(f, x, y);
    let g_inv = g.try_inverse().expect("positive metric");
    let dg = coordinate_derivatives(&|x, y| metric_coord(f, x, y), x, y);
    let h = torsion_coord(f, x, y);
    let mut b = [M4::zeros(); 4];
    for (i, bi) in b.iter_mut().enumerate() {
        for j in 0..4 {
            let mut lowered = nalgebra::Vector4::zeros();
            for l in 0..4 {
                let christoffel = 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                lowered[l] = christoffel - 0.5 * h[i][j][l];
            }
            bi.set_column(j, &(g_inv * lowered));
        }
    }
    b
}

/// `ρ(∂_i, ∂_j) = ½ tr(R^B(∂_i, ∂_j) ∘ J)` by nested finite differences.
pub fn finite_difference_rho(f: FieldFn, x: f64, y: f64) -> M4 {
    let b = bismut_coord(f, x, y);
    let db: Vec<[M4; 4]> = (0..4)
        .map(|k| {
            let comp = |x: f64, y: f64| bismut_coord(f, x, y)[k];
            coordinate_derivatives(&comp, x, y)
        })
        .collect();
    // db[k][i] = ∂_i B_k
    let jc = j_coord(x);
    let mut rho = M4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            // R(∂_i, ∂_j) as a matrix acting on coordinate components
            let r = db[j][i] - db[i][j] + b[i] * b[j] - b[j] * b[i];
            rho[(i, j)] = 0.5 * (r * jc).trace();
        }
    }
    rho
}

/// E-frame components of the coordinate vectors `∂x, ∂y, ∂z, ∂w`.
pub fn coordinate_vectors(x: f64) -> [[f64; 4]; 4] {
    [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, -x, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
}
