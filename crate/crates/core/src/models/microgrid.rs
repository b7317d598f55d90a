//! Averaged-model microgrid: an ideal three-phase generator feeding a diode
//! rectifier and LC filter onto a DC bus, with `N` inverter-fed resistive
//! three-phase loads hanging off the bus.
//!
//! Unknown layout (dimension `12 + 7N`): load blocks first, seven unknowns
//! each (`i_va, i_vb, i_vc, v_la, v_lb, v_lc, v_l0`), then the twelve
//! bus-coupled unknowns (`v_ga, v_gb, v_gc, i_ga, i_gb, i_gc, v_f, v_p,
//! v_n, i_L, phi_L, q_C`). Keeping the coupled unknowns last gives the
//! Jacobian an arrowhead shape with little fill under natural ordering.
//!
//! Residual row `r` is the equation "owned" by unknown `r`.

use std::f64::consts::PI;

use super::{check_len, DaeModel, ModelError};
use crate::ad::Scalar;

/// Physical parameters. Defaults reproduce the self-validating case where
/// each load sees the generator's 100 V, 60 Hz waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrogridParams {
    /// Generator phase voltage amplitude (V).
    pub v0: f64,
    /// Generator and modulation angular frequency (rad/s).
    pub omega: f64,
    /// Per-phase load conductance (S).
    pub g: f64,
    /// Filter capacitance (F).
    pub c: f64,
    /// Filter inductance (H).
    pub l: f64,
    /// Diode saturation current (A).
    pub i_s: f64,
    /// Diode ideality factor.
    pub n_ideality: f64,
    /// Junction temperature (K).
    pub temperature: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Elementary charge (C).
    pub q_e: f64,
    /// Modulation index.
    pub m: f64,
}

impl Default for MicrogridParams {
    fn default() -> Self {
        Self {
            v0: 100.0,
            omega: 2.0 * PI * 60.0,
            g: 0.01,
            c: 1e-4,
            l: 0.02,
            i_s: 18.8e-9,
            n_ideality: 2.0,
            temperature: 300.0,
            k_b: 1.380649e-23,
            q_e: 1.602176634e-19,
            m: 2.0 * PI / (3.0 * 3f64.sqrt()),
        }
    }
}

impl MicrogridParams {
    /// `k_B T / q_e`, about 25.85 mV at 300 K.
    pub fn thermal_voltage(&self) -> f64 {
        self.k_b * self.temperature / self.q_e
    }

    /// Diode exponent scale `n V_T`.
    pub fn diode_scale(&self) -> f64 {
        self.n_ideality * self.thermal_voltage()
    }

    /// Rejects non-positive parameters.
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("V0", self.v0),
            ("omega", self.omega),
            ("G", self.g),
            ("C", self.c),
            ("L", self.l),
            ("Is", self.i_s),
            ("n", self.n_ideality),
            ("T", self.temperature),
            ("k_B", self.k_b),
            ("q_e", self.q_e),
            ("m", self.m),
        ];
        match fields.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            Some((name, v)) => Err(format!("parameter {name} must be positive, got {v}")),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    fn index(self) -> usize {
        self as usize
    }

    /// Phase lead: 0, 2 pi / 3, 4 pi / 3.
    pub fn shift(self) -> f64 {
        2.0 * PI / 3.0 * self.index() as f64
    }
}

/// Inverter modulation signal `d(t) = m sin(omega t + shift)`.
pub fn modulation(t: f64, phase: Phase, params: &MicrogridParams) -> f64 {
    params.m * (params.omega * t + phase.shift()).sin()
}

/// Shockley diode current `I_s (exp(v / (n V_T)) - 1)`.
pub fn diode_current<S: Scalar>(v: S, params: &MicrogridParams) -> S {
    (v / params.diode_scale()).exp() * params.i_s - params.i_s
}

/// Offsets of the twelve bus-coupled unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Global {
    Vga,
    Vgb,
    Vgc,
    Iga,
    Igb,
    Igc,
    Vf,
    Vp,
    Vn,
    IL,
    PhiL,
    Qc,
}

impl Global {
    pub const COUNT: usize = 12;

    fn gen_voltage(p: Phase) -> Global {
        [Global::Vga, Global::Vgb, Global::Vgc][p.index()]
    }

    fn gen_current(p: Phase) -> Global {
        [Global::Iga, Global::Igb, Global::Igc][p.index()]
    }
}

/// Indices of one load's seven unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadBlock {
    base: usize,
}

impl LoadBlock {
    pub const SIZE: usize = 7;

    /// Current through the phase's controlled voltage source.
    pub fn i_v(&self, p: Phase) -> usize {
        self.base + p.index()
    }

    /// Load terminal voltage.
    pub fn v_l(&self, p: Phase) -> usize {
        self.base + 3 + p.index()
    }

    /// Load star point voltage.
    pub fn v_l0(&self) -> usize {
        self.base + 6
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.base..self.base + Self::SIZE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicrogridLayout {
    n_loads: usize,
}

impl MicrogridLayout {
    pub fn new(n_loads: usize) -> Self {
        Self { n_loads }
    }

    pub fn n_loads(&self) -> usize {
        self.n_loads
    }

    pub fn dim(&self) -> usize {
        Global::COUNT + LoadBlock::SIZE * self.n_loads
    }

    pub fn load(&self, k: usize) -> LoadBlock {
        assert!(k < self.n_loads, "load {k} out of range");
        LoadBlock {
            base: LoadBlock::SIZE * k,
        }
    }

    pub fn global(&self, g: Global) -> usize {
        LoadBlock::SIZE * self.n_loads + g as usize
    }

    /// Unknowns whose time derivative enters the residual.
    pub fn differential(&self) -> [usize; 2] {
        [self.global(Global::PhiL), self.global(Global::Qc)]
    }
}

/// Fills all `12 + 7N` residuals.
///
/// Only the `phi_L` and `q_C` entries of `vdot` are read.
pub fn microgrid_residual<S: Scalar>(
    f: &mut [S],
    vdot: &[S],
    v: &[S],
    t: f64,
    params: &MicrogridParams,
    layout: &MicrogridLayout,
) -> Result<(), ModelError> {
    let n = layout.dim();
    check_len("residual", n, f.len())?;
    check_len("vdot", n, vdot.len())?;
    check_len("v", n, v.len())?;

    let gi = |g: Global| layout.global(g);
    let at = |g: Global| &v[layout.global(g)];
    let d = Phase::ALL.map(|p| modulation(t, p, params));

    // Generator terminals.
    for p in Phase::ALL {
        let src = params.v0 * (params.omega * t + p.shift()).sin();
        f[gi(Global::gen_voltage(p))] = at(Global::gen_voltage(p)).clone() - src;
    }

    // Rectifier: upper diodes into node f, lower diodes out of node n.
    let upper = Phase::ALL.map(|p| diode_current(at(Global::gen_voltage(p)).clone() - at(Global::Vf), params));
    let lower = Phase::ALL.map(|p| diode_current(at(Global::Vn).clone() - at(Global::gen_voltage(p)), params));
    for p in Phase::ALL {
        let i = p.index();
        f[gi(Global::gen_current(p))] = at(Global::gen_current(p)).clone() - &upper[i] + &lower[i];
    }

    // LC filter.
    f[gi(Global::Vf)] = upper[0].clone() + &upper[1] + &upper[2] - at(Global::IL);
    f[gi(Global::IL)] = at(Global::PhiL).clone() - &(at(Global::IL).clone() * params.l);
    f[gi(Global::PhiL)] = vdot[gi(Global::PhiL)].clone() - &(at(Global::Vf).clone() - at(Global::Vp));
    f[gi(Global::Qc)] = at(Global::Qc).clone() - &((at(Global::Vp).clone() - at(Global::Vn)) * params.c);

    // Inverters and loads. `drawn` accumulates the averaged current-source
    // currents d * i_l taken from the positive rail and returned to the
    // negative one.
    let v_bus = at(Global::Vp).clone() - at(Global::Vn);
    let mut drawn = S::constant(0.0);
    for k in 0..layout.n_loads() {
        let blk = layout.load(k);
        let mut neutral = S::constant(0.0);
        for p in Phase::ALL {
            let dp = d[p.index()];
            let i_load = (v[blk.v_l(p)].clone() - &v[blk.v_l0()]) * params.g;
            let i_src = i_load.clone() * dp;
            f[blk.i_v(p)] = v[blk.i_v(p)].clone() - &i_load + &i_src;
            f[blk.v_l(p)] = v[blk.v_l(p)].clone() - at(Global::Vn) - &(v_bus.clone() * (0.5 * (1.0 + dp)));
            neutral = neutral + i_load;
            drawn = drawn + i_src;
        }
        f[blk.v_l0()] = neutral;
    }

    // DC bus rails.
    let qdot = &vdot[gi(Global::Qc)];
    f[gi(Global::Vp)] = at(Global::IL).clone() - qdot - &drawn;
    f[gi(Global::Vn)] = lower[0].clone() + &lower[1] + &lower[2] - qdot - &drawn;
    Ok(())
}

/// The microgrid DAE with its parameters and layout.
#[derive(Debug, Clone, Copy)]
pub struct Microgrid {
    pub params: MicrogridParams,
    pub layout: MicrogridLayout,
}

impl Microgrid {
    pub fn new(n_loads: usize) -> Self {
        Self::with_params(n_loads, MicrogridParams::default())
    }

    pub fn with_params(n_loads: usize, params: MicrogridParams) -> Self {
        Self {
            params,
            layout: MicrogridLayout::new(n_loads),
        }
    }

    /// Phase-to-star voltage across load `k`.
    pub fn load_voltage(&self, v: &[f64], k: usize, p: Phase) -> f64 {
        let blk = self.layout.load(k);
        v[blk.v_l(p)] - v[blk.v_l0()]
    }

    pub fn bus_voltage(&self, v: &[f64]) -> f64 {
        v[self.layout.global(Global::Vp)] - v[self.layout.global(Global::Vn)]
    }

    /// Junction voltages (anode minus cathode) of the six rectifier diodes
    /// and their changes along `dv`.
    fn junctions(&self, v: &[f64], dv: &[f64]) -> [(f64, f64); 6] {
        let g = |x: Global| self.layout.global(x);
        let (vf, vn) = (g(Global::Vf), g(Global::Vn));
        let mut out = [(0.0, 0.0); 6];
        for p in Phase::ALL {
            let vg = g(Global::gen_voltage(p));
            out[p.index()] = (v[vg] - v[vf], dv[vg] - dv[vf]);
            out[3 + p.index()] = (v[vn] - v[vg], dv[vn] - dv[vg]);
        }
        out
    }
}

impl DaeModel for Microgrid {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn residual<S: Scalar>(&self, vdot: &[S], v: &[S], t: f64, f: &mut [S]) {
        microgrid_residual(f, vdot, v, t, &self.params, &self.layout)
            .expect("caller passes vectors of the model dimension");
    }

    /// Limits how far any forward-biased diode junction may move in one
    /// iteration: at most a few `n V_T` beyond the larger of its current
    /// value and the critical voltage where the exponential turns steep.
    fn step_fraction(&self, v: &[f64], dv: &[f64]) -> f64 {
        let scale = self.params.diode_scale();
        let v_crit = scale * (scale / (std::f64::consts::SQRT_2 * self.params.i_s)).ln();
        let max_rise = 2.0 * scale;
        let mut frac: f64 = 1.0;
        for (u, du) in self.junctions(v, dv) {
            if du > 0.0 {
                let cap = u.max(v_crit) + max_rise;
                if u + du > cap {
                    frac = frac.min((cap - u) / du);
                }
            }
        }
        frac
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::ADScalar;

    fn sum_modulation(t: f64, p: &MicrogridParams) -> f64 {
        Phase::ALL.iter().map(|&ph| modulation(t, ph, p)).sum()
    }

    #[test]
    fn parameters() {
        let p = MicrogridParams::default();
        assert!((p.m * 3.0 * 3f64.sqrt() / (2.0 * PI) - 1.0).abs() < 1e-15);
        assert!((p.thermal_voltage() - 0.025852).abs() < 1e-6);
        assert!(p.validate().is_ok());
        let bad = MicrogridParams { c: 0.0, ..p };
        assert!(bad.validate().unwrap_err().contains('C'));
    }

    #[test]
    fn modulation_values() {
        let p = MicrogridParams::default();
        assert_eq!(modulation(0.0, Phase::A, &p), 0.0);
        assert!((modulation(0.0, Phase::B, &p) - p.m * 3f64.sqrt() / 2.0).abs() < 1e-15);
        for t in [0.0, 1e-3, 0.0042, 0.013, 0.02, 0.031, 0.05, 0.0777, 0.09, 0.1] {
            assert!(sum_modulation(t, &p).abs() < 1e-12);
            for ph in Phase::ALL {
                assert!(modulation(t, ph, &p).abs() <= p.m);
            }
        }
    }

    #[test]
    fn diode_curve() {
        let p = MicrogridParams::default();
        assert_eq!(diode_current(0.0, &p), 0.0);
        let at_ln2 = diode_current(p.diode_scale() * 2f64.ln(), &p);
        assert!((at_ln2 - p.i_s).abs() < 1e-12 * p.i_s.max(1.0));
        assert!((diode_current(-1.0, &p) + p.i_s).abs() < 1e-12);
    }

    #[test]
    fn layout_dimension_and_order() {
        let l = MicrogridLayout::new(30);
        assert_eq!(l.dim(), 222);
        assert_eq!(l.load(0).range(), 0..7);
        assert_eq!(l.load(29).v_l0(), 209);
        assert_eq!(l.global(Global::Vga), 210);
        assert_eq!(l.global(Global::Qc), 221);
        assert_eq!(MicrogridLayout::new(0).dim(), 12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let l = MicrogridLayout::new(1);
        let p = MicrogridParams::default();
        let mut f = vec![0.0; 18];
        let v = vec![0.0; 19];
        assert!(matches!(
            microgrid_residual(&mut f, &v, &v, 0.0, &p, &l),
            Err(ModelError::Dimension { what: "residual", expected: 19, found: 18 })
        ));
    }

    #[test]
    fn plain_and_ad_values_agree() {
        let grid = Microgrid::new(2);
        let n = grid.dim();
        let v: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 * 0.05 - 0.3).collect();
        let vd: Vec<f64> = (0..n).map(|i| ((i * 104729) % 11) as f64 * 0.1).collect();
        let mut f = vec![0.0; n];
        grid.residual(&vd, &v, 0.0123, &mut f);
        let va: Vec<ADScalar> = v.iter().enumerate().map(|(i, &x)| ADScalar::variable(x, i)).collect();
        let vda: Vec<ADScalar> = vd.iter().map(|&x| ADScalar::constant(x)).collect();
        let mut fa = vec![ADScalar::default(); n];
        grid.residual(&vda, &va, 0.0123, &mut fa);
        for (a, b) in fa.iter().zip(&f) {
            assert_eq!(a.value(), *b);
        }
    }

    #[test]
    fn step_fraction_caps_junction_rise() {
        let grid = Microgrid::new(1);
        let n = grid.dim();
        let v = vec![0.0; n];
        let mut dv = vec![0.0; n];
        dv[grid.layout.global(Global::Vgb)] = 86.6;
        let frac = grid.step_fraction(&v, &dv);
        assert!(frac > 0.0 && frac < 0.02, "{frac}");
        // a fully reverse-biasing update is not limited
        let mut dv = vec![0.0; n];
        dv[grid.layout.global(Global::Vf)] = 50.0;
        dv[grid.layout.global(Global::Vn)] = -50.0;
        assert_eq!(grid.step_fraction(&v, &dv), 1.0);
    }
}
