//! Gate set shared by the program IR and the simulator.
//!
//! Matches the emitted OpenQASM subset: {h, s, sdg, t, tdg, x, z, cx, cz,
//! ch, rz(θ), ry(θ), u1(θ)}. Parameterized angles are radians.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Z,
    Cx,
    Cz,
    Ch,
    Rz(f64),
    Ry(f64),
    /// diag(1, e^{iθ}); emitted as `u1(θ)`.
    Phase(f64),
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cx | Gate::Cz | Gate::Ch => 2,
            _ => 1,
        }
    }

    /// QASM mnemonic (without parameters).
    pub fn qasm_name(self) -> &'static str {
        match self {
            Gate::H => "h",
            Gate::S => "s",
            Gate::Sdg => "sdg",
            Gate::T => "t",
            Gate::Tdg => "tdg",
            Gate::X => "x",
            Gate::Z => "z",
            Gate::Cx => "cx",
            Gate::Cz => "cz",
            Gate::Ch => "ch",
            Gate::Rz(_) => "rz",
            Gate::Ry(_) => "ry",
            Gate::Phase(_) => "u1",
        }
    }

    pub fn param(self) -> Option<f64> {
        match self {
            Gate::Rz(t) | Gate::Ry(t) | Gate::Phase(t) => Some(t),
            _ => None,
        }
    }

    pub fn matrix1(self) -> Option<[[C64; 2]; 2]> {
        let h = FRAC_1_SQRT_2;
        let m = match self {
            Gate::H => [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]],
            Gate::S => diag(ONE, C64::new(0.0, 1.0)),
            Gate::Sdg => diag(ONE, C64::new(0.0, -1.0)),
            Gate::T => diag(ONE, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            Gate::Tdg => diag(ONE, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
            Gate::X => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Z => diag(ONE, -ONE),
            Gate::Rz(t) => diag(C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0)),
            Gate::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
            }
            Gate::Phase(t) => diag(ONE, C64::from_polar(1.0, t)),
            _ => return None,
        };
        Some(m)
    }

    /// 4x4 matrix with basis index = control bit | target bit << 1 is NOT
    /// used; ordering here is index = (q0 bit) + 2*(q1 bit) where q0 is the
    /// first listed qubit (the control for cx/ch).
    pub fn matrix2(self) -> Option<[[C64; 4]; 4]> {
        let mut m = [[ZERO; 4]; 4];
        match self {
            Gate::Cx => {
                // |c,t>: c = bit0, t = bit1.
                m[0][0] = ONE;
                m[2][2] = ONE;
                m[1][3] = ONE;
                m[3][1] = ONE;
                Some(m)
            }
            Gate::Cz => {
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][2] = ONE;
                m[3][3] = -ONE;
                Some(m)
            }
            Gate::Ch => {
                let h = FRAC_1_SQRT_2;
                m[0][0] = ONE;
                m[2][2] = ONE;
                m[1][1] = C64::new(h, 0.0);
                m[1][3] = C64::new(h, 0.0);
                m[3][1] = C64::new(h, 0.0);
                m[3][3] = C64::new(-h, 0.0);
                Some(m)
            }
            _ => None,
        }
    }
}

fn diag(a: C64, b: C64) -> [[C64; 2]; 2] {
    [[a, ZERO], [ZERO, b]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn ch_equals_ry_cz_ry_conjugation() {
        // CH(c,t) = (I⊗Ry(π/4)) CZ (I⊗Ry(-π/4)).
        let ry_p = Gate::Ry(std::f64::consts::FRAC_PI_4).matrix1().unwrap();
        let ry_m = Gate::Ry(-std::f64::consts::FRAC_PI_4).matrix1().unwrap();
        let cz = Gate::Cz.matrix2().unwrap();
        let ch = Gate::Ch.matrix2().unwrap();
        // Build (I ⊗ V) with target = bit1.
        let lift = |v: [[C64; 2]; 2]| {
            let mut m = [[ZERO; 4]; 4];
            for c in 0..2 {
                for t_out in 0..2 {
                    for t_in in 0..2 {
                        m[c + 2 * t_out][c + 2 * t_in] = v[t_out][t_in];
                    }
                }
            }
            m
        };
        let mul = |a: [[C64; 4]; 4], b: [[C64; 4]; 4]| {
            let mut m = [[ZERO; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        m[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            m
        };
        let got = mul(lift(ry_p), mul(cz, lift(ry_m)));
        for i in 0..4 {
            for j in 0..4 {
                assert!(approx(got[i][j], ch[i][j]), "mismatch at {i},{j}");
            }
        }
    }

    #[test]
    fn t_phase_matches_p_quarter_pi() {
        let t = Gate::T.matrix1().unwrap();
        let p = Gate::Phase(std::f64::consts::FRAC_PI_4).matrix1().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(approx(t[i][j], p[i][j]));
            }
        }
    }
}
