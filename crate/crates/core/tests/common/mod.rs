//! Dense reference implementation of the master equation shared by the
//! integration tests.

#![allow(dead_code)]

use mollow_core::liouvillian::{ModelKind, ModelParams};
use num_complex::Complex64 as C;

#[derive(Clone)]
pub struct Dense {
    pub n: usize,
    pub v: Vec<C>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, v: vec![C::new(0.0, 0.0); n * n] }
    }
    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.v[i * n + i] = C::new(1.0, 0.0);
        }
        m
    }
    pub fn lowering(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 1..n {
            m.v[(k - 1) * n + k] = C::new((k as f64).sqrt(), 0.0);
        }
        m
    }
    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut r = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.v[i * n + k];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    r.v[i * n + j] += a * o.v[k * n + j];
                }
            }
        }
        r
    }
    pub fn dag(&self) -> Dense {
        let n = self.n;
        let mut r = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                r.v[j * n + i] = self.v[i * n + j].conj();
            }
        }
        r
    }
    pub fn add(&self, o: &Dense) -> Dense {
        Dense { n: self.n, v: self.v.iter().zip(&o.v).map(|(a, b)| a + b).collect() }
    }
    pub fn sub(&self, o: &Dense) -> Dense {
        Dense { n: self.n, v: self.v.iter().zip(&o.v).map(|(a, b)| a - b).collect() }
    }
    pub fn scale(&self, s: C) -> Dense {
        Dense { n: self.n, v: self.v.iter().map(|a| a * s).collect() }
    }
    pub fn kron(&self, o: &Dense) -> Dense {
        let n = self.n * o.n;
        let mut r = Self::zeros(n);
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..o.n {
                    for l in 0..o.n {
                        r.v[(i * o.n + k) * n + j * o.n + l] = self.v[i * self.n + j] * o.v[k * o.n + l];
                    }
                }
            }
        }
        r
    }
}

pub fn kron_all(ops: &[Dense]) -> Dense {
    ops[1..].iter().fold(ops[0].clone(), |acc, o| acc.kron(o))
}

pub fn comm(a: &Dense, b: &Dense) -> Dense {
    a.mul(b).sub(&b.mul(a))
}

pub fn lindblad(o: &Dense, rho: &Dense, rate: f64) -> Dense {
    let od = o.dag();
    let odo = od.mul(o);
    o.mul(rho).mul(&od).sub(&odo.mul(rho).add(&rho.mul(&odo)).scale(C::new(0.5, 0.0))).scale(C::new(rate, 0.0))
}

/// Right-hand side of the master equation written out term by term.
pub fn rhs(kind: ModelKind, p: &ModelParams<f64>, rho: &Dense) -> Dense {
    let r = |x: f64| C::new(x, 0.0);
    let nc = p.n_cavity;
    let nm = p.n_mech;
    let i2 = Dense::eye(2);
    let ic = Dense::eye(nc);
    let sm = Dense::lowering(2);
    let (h, jumps, cascade): (Dense, Vec<(Dense, f64)>, Option<(Dense, Dense)>) = match kind {
        ModelKind::SourceOnly => {
            let h = sm.dag().mul(&sm).scale(r(p.delta_s)).add(&sm.add(&sm.dag()).scale(r(p.mu1.sqrt() * p.omega_drive)));
            (h, vec![(sm.clone(), p.gamma_s)], None)
        }
        ModelKind::CascadedJC | ModelKind::CascadedJCThermal => {
            let s = kron_all(&[sm.clone(), ic.clone(), i2.clone()]);
            let a = kron_all(&[i2.clone(), Dense::lowering(nc), i2.clone()]);
            let at = kron_all(&[i2.clone(), ic.clone(), sm.clone()]);
            let hs = s.dag().mul(&s).scale(r(p.delta_s)).add(&s.add(&s.dag()).scale(r(p.mu1.sqrt() * p.omega_drive)));
            let ht = a
                .dag()
                .mul(&a)
                .scale(r(p.delta))
                .add(&at.dag().mul(&at).scale(r(p.delta_a())))
                .add(&at.dag().mul(&a).add(&at.mul(&a.dag())).scale(r(p.g)));
            let nth = p.n_th;
            let mut jumps = vec![
                (s.clone(), p.gamma_s * (nth + 1.0)),
                (a.clone(), p.kappa * (nth + 1.0)),
                (at.clone(), p.gamma * (nth + 1.0)),
            ];
            if nth > 0.0 {
                jumps.push((s.dag(), p.gamma_s * nth));
                jumps.push((a.dag(), p.kappa * nth));
                jumps.push((at.dag(), p.gamma * nth));
            }
            (hs.add(&ht), jumps, Some((s, a)))
        }
        ModelKind::CascadedOMS => {
            let s = kron_all(&[sm.clone(), ic.clone(), Dense::eye(nm)]);
            let a = kron_all(&[i2.clone(), Dense::lowering(nc), Dense::eye(nm)]);
            let b = kron_all(&[i2.clone(), ic.clone(), Dense::lowering(nm)]);
            let hs = s.dag().mul(&s).scale(r(p.delta_s)).add(&s.add(&s.dag()).scale(r(p.mu1.sqrt() * p.omega_drive)));
            let na = a.dag().mul(&a);
            let ht = na
                .scale(r(p.delta))
                .add(&b.dag().mul(&b).scale(r(p.omega_m)))
                .add(&na.mul(&b.add(&b.dag())).scale(r(p.g_m)));
            (hs.add(&ht), vec![(s.clone(), p.gamma_s), (a.clone(), p.kappa), (b, p.gamma_m)], Some((s, a)))
        }
        ModelKind::ClassicalJC => {
            let a = Dense::lowering(nc).kron(&i2);
            let at = ic.kron(&sm);
            let h = a
                .dag()
                .mul(&a)
                .scale(r(p.delta))
                .add(&at.dag().mul(&at).scale(r(p.delta_a())))
                .add(&at.dag().mul(&a).add(&at.mul(&a.dag())).scale(r(p.g)))
                .add(&a.add(&a.dag()).scale(r(p.omega_drive)));
            (h, vec![(a, p.kappa), (at, p.gamma)], None)
        }
        ModelKind::ClassicalOMS => {
            let a = Dense::lowering(nc).kron(&Dense::eye(nm));
            let b = ic.kron(&Dense::lowering(nm));
            let na = a.dag().mul(&a);
            let h = na
                .scale(r(p.delta))
                .add(&b.dag().mul(&b).scale(r(p.omega_m)))
                .add(&na.mul(&b.add(&b.dag())).scale(r(p.g_m)))
                .add(&a.add(&a.dag()).scale(r(p.omega_drive)));
            (h, vec![(a, p.kappa), (b, p.gamma_m)], None)
        }
    };
    let mut out = comm(&h, rho).scale(C::new(0.0, -1.0));
    for (o, rate) in &jumps {
        out = out.add(&lindblad(o, rho, *rate));
    }
    if let Some((s, a)) = cascade {
        let k = (p.mu2 * p.gamma_s * p.kappa).sqrt();
        let forward = comm(&a.dag(), &s.mul(rho)).add(&comm(&rho.mul(&s.dag()), &a));
        out = out.sub(&forward.scale(r(k * (p.n_th + 1.0))));
        if p.n_th > 0.0 {
            let reverse = comm(&a, &s.dag().mul(rho)).add(&comm(&rho.mul(&s), &a.dag()));
            out = out.sub(&reverse.scale(r(k * p.n_th)));
        }
    }
    out
}

pub fn random_density(n: usize, seed: &[f64]) -> Dense {
    let mut m = Dense::zeros(n);
    for (k, v) in m.v.iter_mut().enumerate() {
        *v = C::new(seed[(2 * k) % seed.len()], seed[(2 * k + 1) % seed.len()]);
    }
    let rho = m.mul(&m.dag());
    let tr: f64 = (0..n).map(|i| rho.v[i * n + i].re).sum();
    rho.scale(C::new(1.0 / tr, 0.0))
}

pub fn params_for(kind: ModelKind, knobs: &[f64]) -> ModelParams<f64> {
    let mut p = ModelParams::<f64> {
        n_cavity: 3,
        n_mech: 3,
        delta: knobs[0],
        delta_s: knobs[1],
        omega_drive: knobs[2],
        mu1: knobs[3],
        mu2: 1.0 - knobs[3],
        ..Default::default()
    };
    if kind.is_jc() {
        p.g = knobs[4];
        p.delta_a = Some(knobs[5]);
    }
    if kind.is_oms() {
        p.g_m = knobs[4];
    }
    if kind == ModelKind::CascadedJCThermal {
        p.n_th = knobs[6];
    }
    p
}

