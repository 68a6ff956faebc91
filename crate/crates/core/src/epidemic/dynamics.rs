use crate::netgen::Network;

use super::{EpidemicError, EpidemicParams, HealthState};

/// Time derivative of a [`HealthState`].
#[derive(Debug, Clone, PartialEq)]
pub struct HealthDerivative {
    pub ds: Vec<f64>,
    pub dx: Vec<f64>,
    pub dr: Vec<f64>,
    pub dd: Vec<f64>,
}

/// Right-hand side of the networked SIRD system under lockdown `l`.
///
/// ẋ_i = β s_i (1−l_i) Σ_j A_ij (1−l_j) x_j − (γ+κ) x_i,
/// ṡ_i = −β s_i (1−l_i) Σ_j A_ij (1−l_j) x_j, ṙ_i = γ x_i, ḋ_i = κ x_i.
pub fn derivative(
    state: &HealthState,
    l: &[f64],
    net: &Network,
    params: &EpidemicParams,
) -> Result<HealthDerivative, EpidemicError> {
    let n = net.n();
    if state.n() != n {
        return Err(EpidemicError::Dimension {
            what: "state",
            expected: n,
            got: state.n(),
        });
    }
    check_control(l, n)?;
    state.validate()?;
    let kernel = Kernel::new(net, *params);
    let comp = Compartments::from_state(state);
    let mut out = Compartments::zeros(n);
    let mut scratch = vec![0.0; n];
    kernel.rhs(&comp, l, &mut out, &mut scratch);
    Ok(HealthDerivative {
        ds: out.s,
        dx: out.x,
        dr: out.r,
        dd: out.d,
    })
}

pub(crate) fn check_control(l: &[f64], n: usize) -> Result<(), EpidemicError> {
    if l.len() != n {
        return Err(EpidemicError::Dimension {
            what: "control",
            expected: n,
            got: l.len(),
        });
    }
    if let Some(agent) = l.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(EpidemicError::InvalidControl {
            agent,
            value: l[agent],
        });
    }
    Ok(())
}

/// Four compartment vectors used as RK4 registers.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Compartments {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub d: Vec<f64>,
}

impl Compartments {
    pub fn zeros(n: usize) -> Self {
        Self {
            s: vec![0.0; n],
            x: vec![0.0; n],
            r: vec![0.0; n],
            d: vec![0.0; n],
        }
    }

    pub fn from_state(st: &HealthState) -> Self {
        Self {
            s: st.s.clone(),
            x: st.x.clone(),
            r: st.r.clone(),
            d: st.d.clone(),
        }
    }

    /// self = base + h·dir
    pub fn set_axpy(&mut self, base: &Compartments, h: f64, dir: &Compartments) {
        fn go(out: &mut [f64], a: &[f64], h: f64, b: &[f64]) {
            for ((o, a), b) in out.iter_mut().zip(a).zip(b) {
                *o = a + h * b;
            }
        }
        go(&mut self.s, &base.s, h, &dir.s);
        go(&mut self.x, &base.x, h, &dir.x);
        go(&mut self.r, &base.r, h, &dir.r);
        go(&mut self.d, &base.d, h, &dir.d);
    }
}

/// Shared evaluation of the N-SIRD right-hand side.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel<'a> {
    pub net: &'a Network,
    pub params: EpidemicParams,
}

impl<'a> Kernel<'a> {
    pub fn new(net: &'a Network, params: EpidemicParams) -> Self {
        Self { net, params }
    }

    /// out_i = Σ_j A_ij (1 − l_j) x_j
    pub fn pressure(&self, x: &[f64], l: &[f64], out: &mut [f64]) {
        let (offsets, targets, weights) = self.net.csr();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in offsets[i]..offsets[i + 1] {
                let j = targets[k];
                acc += weights[k] * (1.0 - l[j]) * x[j];
            }
            *o = acc;
        }
    }

    pub fn rhs(&self, st: &Compartments, l: &[f64], out: &mut Compartments, pressure: &mut [f64]) {
        let EpidemicParams { beta, gamma, kappa } = self.params;
        self.pressure(&st.x, l, pressure);
        for i in 0..st.s.len() {
            let flow = beta * st.s[i] * (1.0 - l[i]) * pressure[i];
            let xi = st.x[i];
            out.s[i] = -flow;
            out.x[i] = flow - gamma * xi - kappa * xi;
            out.r[i] = gamma * xi;
            out.d[i] = kappa * xi;
        }
    }

    /// ẋ at one instant, written into `out`.
    pub fn infection_rate(
        &self,
        s: &[f64],
        x: &[f64],
        l: &[f64],
        out: &mut [f64],
        pressure: &mut [f64],
    ) {
        let EpidemicParams { beta, gamma, kappa } = self.params;
        self.pressure(x, l, pressure);
        for i in 0..s.len() {
            out[i] = beta * s[i] * (1.0 - l[i]) * pressure[i] - gamma * x[i] - kappa * x[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Network {
        Network::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn full_lockdown_only_decays() {
        let p = EpidemicParams::baseline();
        let st = HealthState::uniform(2, 0.1).unwrap();
        let der = derivative(&st, &[1.0, 1.0], &pair(), &p).unwrap();
        for i in 0..2 {
            assert_eq!(der.ds[i], 0.0);
            assert!((der.dx[i] + p.removal_rate() * 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn disease_free_is_fixed_point() {
        let der = derivative(
            &HealthState::disease_free(2),
            &[0.0, 0.0],
            &pair(),
            &EpidemicParams::baseline(),
        )
        .unwrap();
        assert!(der
            .dx
            .iter()
            .chain(&der.ds)
            .chain(&der.dr)
            .chain(&der.dd)
            .all(|v| *v == 0.0));
    }

    #[test]
    fn hand_evaluated_two_agent_flow() {
        // s_0 = 1, x_1 = 0.5: ẋ_0 = 0.2 · 1 · 0.5 = 0.1
        let st = HealthState {
            s: vec![1.0, 0.5],
            x: vec![0.0, 0.5],
            r: vec![0.0, 0.0],
            d: vec![0.0, 0.0],
        };
        let der = derivative(&st, &[0.0, 0.0], &pair(), &EpidemicParams::baseline()).unwrap();
        assert!((der.dx[0] - 0.1).abs() < 1e-15);
        assert!((der.ds[0] + 0.1).abs() < 1e-15);
        for i in 0..2 {
            let total = der.ds[i] + der.dx[i] + der.dr[i] + der.dd[i];
            assert!(total.abs() < 1e-16);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = EpidemicParams::baseline();
        let st = HealthState::uniform(2, 0.1).unwrap();
        assert!(matches!(
            derivative(&st, &[0.0], &pair(), &p),
            Err(EpidemicError::Dimension { .. })
        ));
        assert!(matches!(
            derivative(&st, &[0.0, 1.5], &pair(), &p),
            Err(EpidemicError::InvalidControl { agent: 1, .. })
        ));
    }
}
