//! Exact self-similar 3-rarefaction fan and its smooth approximation.
//!
//! The smooth wave is built from the Burgers equation with tanh data of
//! width delta, solved exactly by characteristics; all x1-derivatives up to
//! order 3 come from implicit differentiation, never from nested finite
//! differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{
    self, eigenvalues, riemann_invariants_3, sound_speed, GasModel, PrimitiveState,
};

/// Two end states connected along the 3-rarefaction curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiemannData {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
}

impl RiemannData {
    /// Connect `left` to the state with velocity `v1_plus` along the
    /// 3-rarefaction curve (constant entropy and constant first invariant).
    pub fn connect(gas: &GasModel, left: PrimitiveState, v1_plus: f64) -> Result<Self> {
        let right = connect_right_state(gas, &left, v1_plus)?;
        Ok(RiemannData { left, right })
    }

    /// Check the connection invariants on arbitrary end states.
    pub fn validate(&self, gas: &GasModel) -> Result<()> {
        let (s1l, s2l) = riemann_invariants_3(gas, &self.left)?;
        let (s1r, s2r) = riemann_invariants_3(gas, &self.right)?;
        if (s1l - s1r).abs() > 1e-10 || (s2l - s2r).abs() > 1e-10 {
            return Err(Error::NotARarefaction(format!(
                "3-Riemann invariants differ: ({s1l}, {s2l}) vs ({s1r}, {s2r})"
            )));
        }
        if self.lambda3_right(gas)? < self.lambda3_left(gas)? {
            return Err(Error::NotARarefaction(
                "third eigenvalue not expanding".into(),
            ));
        }
        Ok(())
    }

    pub fn lambda3_left(&self, gas: &GasModel) -> Result<f64> {
        Ok(eigenvalues(gas, &self.left)?.2)
    }

    pub fn lambda3_right(&self, gas: &GasModel) -> Result<f64> {
        Ok(eigenvalues(gas, &self.right)?.2)
    }

    pub fn strength(&self) -> f64 {
        self.right.v1 - self.left.v1
    }
}

/// Close the 3-rarefaction curve from the left state: c+ = c- +
/// (gamma-1)(v1+ - v1-)/2, then theta and rho from isentropy.
pub fn connect_right_state(
    gas: &GasModel,
    left: &PrimitiveState,
    v1_plus: f64,
) -> Result<PrimitiveState> {
    if v1_plus < left.v1 {
        return Err(Error::NotARarefaction(format!(
            "v1+ = {v1_plus} < v1- = {}; the 3-eigenvalue must expand",
            left.v1
        )));
    }
    let c_minus = sound_speed(gas, left.rho, left.theta)?;
    let c_plus = c_minus + 0.5 * (gas.gamma - 1.0) * (v1_plus - left.v1);
    let theta_plus = c_plus * c_plus / (gas.gamma * gas.r);
    let rho_plus = left.rho * (theta_plus / left.theta).powf(1.0 / (gas.gamma - 1.0));
    PrimitiveState::new(rho_plus, v1_plus, theta_plus)
}

/// Fan edge speeds and the smoothing width of the tanh data.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoothFanParams {
    pub b_minus: f64,
    pub b_plus: f64,
    pub delta: f64,
}

/// delta = eps^b |ln eps|.
pub fn delta_rule(eps: f64, b_exponent: f64) -> f64 {
    eps.powf(b_exponent) * eps.ln().abs()
}

impl SmoothFanParams {
    pub fn new(b_minus: f64, b_plus: f64, delta: f64) -> Result<Self> {
        // equality is the zero-strength wave: B is constant
        if !(b_minus <= b_plus) {
            return Err(Error::Config(format!(
                "fan edges must satisfy B- <= B+, got {b_minus}, {b_plus}"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        Ok(SmoothFanParams {
            b_minus,
            b_plus,
            delta,
        })
    }

    /// Edges from the Riemann data, width from delta.
    pub fn for_data(gas: &GasModel, data: &RiemannData, delta: f64) -> Result<Self> {
        SmoothFanParams::new(data.lambda3_left(gas)?, data.lambda3_right(gas)?, delta)
    }

    fn mid(&self) -> f64 {
        0.5 * (self.b_plus + self.b_minus)
    }

    fn half(&self) -> f64 {
        0.5 * (self.b_plus - self.b_minus)
    }
}

/// Smoothed step data B0(x1) with its first three derivatives.
pub fn burgers_initial(params: &SmoothFanParams, x1: f64) -> f64 {
    params.mid() + params.half() * (x1 / params.delta).tanh()
}

fn initial_derivatives(params: &SmoothFanParams, x0: f64) -> (f64, f64, f64, f64) {
    let d = params.delta;
    let th = (x0 / d).tanh();
    let sech2 = 1.0 - th * th;
    let b0 = params.mid() + params.half() * th;
    let b1 = params.half() / d * sech2;
    let b2 = -2.0 * params.half() / (d * d) * sech2 * th;
    let b3 = -2.0 * params.half() / (d * d * d) * sech2 * (sech2 - 2.0 * th * th);
    (b0, b1, b2, b3)
}

/// B and its first three x1-derivatives at (t, x1).
#[derive(Debug, Clone, Copy, Default)]
pub struct BurgersSample {
    pub b: f64,
    pub bx: f64,
    pub bxx: f64,
    pub bxxx: f64,
}

/// Solve the Burgers problem by characteristics: find the foot point x0 with
/// x1 = x0 + B0(x0) t, then push B0 and its derivatives through the map.
pub fn burgers_smooth(params: &SmoothFanParams, t: f64, x1: f64) -> Result<BurgersSample> {
    if t < 0.0 {
        return Err(Error::Contract(format!("burgers_smooth needs t >= 0, got {t}")));
    }
    let x0 = characteristic_foot(params, t, x1)?;
    let (_, b1, b2, b3) = initial_derivatives(params, x0);
    let den = 1.0 + t * b1;
    Ok(BurgersSample {
        b: burgers_initial(params, x0),
        bx: b1 / den,
        bxx: b2 / den.powi(3),
        bxxx: b3 / den.powi(4) - 3.0 * t * b2 * b2 / den.powi(5),
    })
}

/// Safeguarded Newton with a bisection fallback on the monotone
/// characteristic residual g(x0) = x0 + B0(x0) t - x1.
fn characteristic_foot(params: &SmoothFanParams, t: f64, x1: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(x1);
    }
    let g = |x0: f64| x0 + burgers_initial(params, x0) * t - x1;
    let mut lo = x1 - params.b_plus * t;
    let mut hi = x1 - params.b_minus * t;
    let tol = 1e-13 * (1.0 + x1.abs() + params.b_plus.abs() * t);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx.abs() <= tol {
            return Ok(x);
        }
        if gx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = 1.0 + t * initial_derivatives(params, x).1;
        let newton = x - gx / slope;
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    // monotone residual with a valid bracket: failure here is an internal bug
    panic!(
        "characteristic root-finder failed to converge at t = {t}, x1 = {x1} (residual {})",
        g(x)
    );
}

/// State of the smooth rarefaction with x1-derivatives up to order 3
/// per component, ordered (rho, v1, theta).
#[derive(Debug, Clone, Copy)]
pub struct ProfileSample {
    pub state: PrimitiveState,
    pub d1: [f64; 3],
    pub d2: [f64; 3],
    pub d3: [f64; 3],
    /// Burgers value lambda3 = B at the sample point.
    pub b: BurgersSample,
}

/// Smooth approximate rarefaction: the state with lambda3 = B(t, x1) and
/// both 3-Riemann invariants pinned to the end-state values.
pub fn smooth_rarefaction(
    gas: &GasModel,
    data: &RiemannData,
    params: &SmoothFanParams,
    t: f64,
    x1: f64,
) -> Result<ProfileSample> {
    let b = burgers_smooth(params, t, x1)?;
    let (sigma1, _) = riemann_invariants_3(gas, &data.left)?;
    let g = gas.gamma;
    let gr = g * gas.r;

    let scale = (g - 1.0) / (g + 1.0);
    let c = scale * (b.b - sigma1);
    let cx = scale * b.bx;
    let cxx = scale * b.bxx;
    let cxxx = scale * b.bxxx;

    let v1 = b.b - c;
    let v1x = b.bx - cx;
    let v1xx = b.bxx - cxx;
    let v1xxx = b.bxxx - cxxx;

    let theta = c * c / gr;
    let theta_x = 2.0 * c * cx / gr;
    let theta_xx = 2.0 * (cx * cx + c * cxx) / gr;
    let theta_xxx = 2.0 * (3.0 * cx * cxx + c * cxxx) / gr;

    // constant entropy: rho = rho_- (theta/theta_-)^(1/(gamma-1))
    let alpha = 1.0 / (g - 1.0);
    let k = data.left.rho * data.left.theta.powf(-alpha);
    let rho = k * theta.powf(alpha);
    let ta = |p: f64| theta.powf(alpha - p);
    let rho_x = k * alpha * ta(1.0) * theta_x;
    let rho_xx = k * alpha * ((alpha - 1.0) * ta(2.0) * theta_x * theta_x + ta(1.0) * theta_xx);
    let rho_xxx = k
        * alpha
        * ((alpha - 1.0) * (alpha - 2.0) * ta(3.0) * theta_x.powi(3)
            + 3.0 * (alpha - 1.0) * ta(2.0) * theta_x * theta_xx
            + ta(1.0) * theta_xxx);

    Ok(ProfileSample {
        state: PrimitiveState::new(rho, v1, theta)?,
        d1: [rho_x, v1x, theta_x],
        d2: [rho_xx, v1xx, theta_xx],
        d3: [rho_xxx, v1xxx, theta_xxx],
        b,
    })
}

/// Exact self-similar fan state at (t, x1).
pub fn exact_fan(gas: &GasModel, data: &RiemannData, t: f64, x1: f64) -> Result<PrimitiveState> {
    if t <= 0.0 {
        return Err(Error::Contract(format!("exact_fan needs t > 0, got {t}")));
    }
    let b_minus = data.lambda3_left(gas)?;
    let b_plus = data.lambda3_right(gas)?;
    let xi = x1 / t;
    if xi <= b_minus {
        return Ok(data.left);
    }
    if xi >= b_plus {
        return Ok(data.right);
    }
    let (sigma1, _) = riemann_invariants_3(gas, &data.left)?;
    let g = gas.gamma;
    let c = (g - 1.0) / (g + 1.0) * (xi - sigma1);
    let v1 = xi - c;
    let theta = c * c / (g * gas.r);
    let rho = data.left.rho * (theta / data.left.theta).powf(1.0 / (g - 1.0));
    PrimitiveState::new(rho, v1, theta)
}

/// Uniform cell-centered 1D grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid1 {
    pub x_left: f64,
    pub x_right: f64,
    pub n: usize,
}

impl Grid1 {
    pub fn new(x_left: f64, x_right: f64, n: usize) -> Result<Self> {
        if !(x_left < x_right) || n == 0 {
            return Err(Error::Config(format!(
                "invalid grid: [{x_left}, {x_right}], n = {n}"
            )));
        }
        Ok(Grid1 { x_left, x_right, n })
    }

    /// Truncated domain [B- t - 10 delta - 1, B+ t + 10 delta + 1] with
    /// `cells_per_delta` cells across the smoothing width.
    pub fn for_fan(params: &SmoothFanParams, t: f64, cells_per_delta: usize) -> Result<Self> {
        let x_left = params.b_minus * t - 10.0 * params.delta - 1.0;
        let x_right = params.b_plus * t + 10.0 * params.delta + 1.0;
        let dx = params.delta / cells_per_delta as f64;
        let n = ((x_right - x_left) / dx).ceil() as usize;
        Grid1::new(x_left, x_right, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.center(i))
    }

    pub fn resolves(&self, delta: f64, cells: usize) -> Result<()> {
        if self.dx() > delta / cells as f64 {
            return Err(Error::Resolution(format!(
                "dx = {} does not resolve delta = {delta} with {cells} cells",
                self.dx()
            )));
        }
        Ok(())
    }
}

/// Which L^p norm to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpNorm {
    L1,
    L2,
    LInf,
}

impl LpNorm {
    pub fn inv_p(&self) -> f64 {
        match self {
            LpNorm::L1 => 1.0,
            LpNorm::L2 => 0.5,
            LpNorm::LInf => 0.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LpNorm::L1 => "1",
            LpNorm::L2 => "2",
            LpNorm::LInf => "inf",
        }
    }

    /// Midpoint-quadrature L^p norm of samples on a uniform grid.
    pub fn of(&self, values: &[f64], dx: f64) -> f64 {
        match self {
            LpNorm::L1 => values.iter().map(|v| v.abs()).sum::<f64>() * dx,
            LpNorm::L2 => (values.iter().map(|v| v * v).sum::<f64>() * dx).sqrt(),
            LpNorm::LInf => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }
}

/// One measured derivative norm of the smooth profile with the decay scale
/// it is expected to follow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormRow {
    pub order: usize,
    pub p: LpNorm,
    pub value: f64,
    pub predicted_scale: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NormTable {
    pub rows: Vec<NormRow>,
}

impl NormTable {
    pub fn get(&self, order: usize, p: LpNorm) -> Option<&NormRow> {
        self.rows.iter().find(|r| r.order == order && r.p == p)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("order,p,value,predicted_scale\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.order,
                r.p.label(),
                r.value,
                r.predicted_scale
            ));
        }
        out
    }
}

/// Discrete L^p norms of the first three x1-derivatives of (rho, v1, theta)
/// at time t, paired with the decay scales (delta + t)^(-1+1/p),
/// (delta + t)^-1 delta^(-1+1/p), (delta + t)^-1 delta^(-2+1/p).
pub fn derivative_norm_table(
    gas: &GasModel,
    data: &RiemannData,
    params: &SmoothFanParams,
    t: f64,
    ps: &[LpNorm],
    grid: &Grid1,
) -> Result<NormTable> {
    grid.resolves(params.delta, 16)?;
    let mut fields: [[Vec<f64>; 3]; 3] = Default::default();
    for x in grid.centers() {
        let s = smooth_rarefaction(gas, data, params, t, x)?;
        for c in 0..3 {
            fields[0][c].push(s.d1[c]);
            fields[1][c].push(s.d2[c]);
            fields[2][c].push(s.d3[c]);
        }
    }
    let dx = grid.dx();
    let dt = params.delta + t;
    let mut table = NormTable::default();
    for (k, per_comp) in fields.iter().enumerate() {
        for &p in ps {
            let ip = p.inv_p();
            let predicted = match k {
                0 => dt.powf(-1.0 + ip),
                1 => dt.powi(-1) * params.delta.powf(-1.0 + ip),
                _ => dt.powi(-1) * params.delta.powf(-2.0 + ip),
            };
            // componentwise max of the three norms
            let value = per_comp
                .iter()
                .map(|f| p.of(f, dx))
                .fold(0.0f64, f64::max);
            table.rows.push(NormRow {
                order: k + 1,
                p,
                value,
                predicted_scale: predicted,
            });
        }
    }
    Ok(table)
}

/// Sup over the grid of the componentwise distance between the smooth wave
/// and the exact fan at time t.
pub fn fan_distance(
    gas: &GasModel,
    data: &RiemannData,
    params: &SmoothFanParams,
    t: f64,
    grid: &Grid1,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Contract(format!("fan_distance needs t > 0, got {t}")));
    }
    let mut sup = 0.0f64;
    for x in grid.centers() {
        let s = smooth_rarefaction(gas, data, params, t, x)?.state;
        let f = exact_fan(gas, data, t, x)?;
        sup = sup
            .max((s.rho - f.rho).abs())
            .max((s.v1 - f.v1).abs())
            .max((s.theta - f.theta).abs());
    }
    Ok(sup)
}

/// Conserved fields (rho, m1, E) of the smooth profile at a sample point.
pub fn sample_conserved(gas: &GasModel, s: &ProfileSample) -> gas::ConservedState {
    gas::prim_to_cons(gas, &s.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::entropy;

    fn gas() -> GasModel {
        GasModel::air_like()
    }

    fn data() -> RiemannData {
        RiemannData::connect(
            &gas(),
            PrimitiveState::new(1.0, 0.0, 1.0).unwrap(),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn connect_matches_reference_values() {
        let d = data();
        assert!((d.right.rho - 1.5003).abs() < 1e-4);
        assert!((d.right.theta - 1.17618).abs() < 1e-5);
        d.validate(&gas()).unwrap();
        // entropy constant along the curve
        let g = gas();
        let sl = entropy(&g, d.left.rho, d.left.theta).unwrap();
        let sr = entropy(&g, d.right.rho, d.right.theta).unwrap();
        assert!((sl - sr).abs() < 1e-10);
    }

    // Independent oracle: bisection on the invariant equations instead of the
    // closed form.
    #[test]
    fn connect_agrees_with_root_finder() {
        let g = gas();
        let left = PrimitiveState::new(1.0, 0.0, 1.0).unwrap();
        let v1p = 0.5;
        let (sig1, s_left) = riemann_invariants_3(&g, &left).unwrap();
        // unknown theta+: sigma1(theta+) - sig1 = 0 along constant entropy
        let f = |theta: f64| {
            let rho = left.rho * (theta / left.theta).powf(1.0 / (g.gamma - 1.0));
            let st = PrimitiveState::new(rho, v1p, theta).unwrap();
            riemann_invariants_3(&g, &st).unwrap().0 - sig1
        };
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            // f is decreasing in theta
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta_plus = 0.5 * (lo + hi);
        let d = data();
        assert!((d.right.theta - theta_plus).abs() < 1e-9);
        let s_right = entropy(&g, d.right.rho, d.right.theta).unwrap();
        assert!((s_left - s_right).abs() < 1e-12);
    }

    #[test]
    fn zero_strength_wave() {
        let g = gas();
        let left = PrimitiveState::new(1.0, 0.0, 1.0).unwrap();
        let d = RiemannData::connect(&g, left, 0.0).unwrap();
        assert_eq!(d.right, d.left);
        let params = SmoothFanParams::for_data(&g, &d, 0.1).unwrap();
        let grid = Grid1::new(-3.0, 3.0, 400).unwrap();
        assert!(fan_distance(&g, &d, &params, 1.0, &grid).unwrap() < 1e-12);
    }

    #[test]
    fn exact_fan_regions() {
        let g = gas();
        let d = data();
        let bm = d.lambda3_left(&g).unwrap();
        let bp = d.lambda3_right(&g).unwrap();
        let far_left = exact_fan(&g, &d, 1.0, bm - 1.0).unwrap();
        assert_eq!(far_left, d.left);
        let far_right = exact_fan(&g, &d, 1.0, bp + 1.0).unwrap();
        assert_eq!(far_right, d.right);
        // continuity at the left edge
        let edge = exact_fan(&g, &d, 1.0, bm).unwrap();
        let inside = exact_fan(&g, &d, 1.0, bm + 1e-12).unwrap();
        assert!((edge.rho - inside.rho).abs() < 1e-10);
        // inside the fan lambda3 = x1/t
        let x = 0.5 * (bm + bp);
        let st = exact_fan(&g, &d, 1.0, x).unwrap();
        let l3 = eigenvalues(&g, &st).unwrap().2;
        assert!((l3 - x).abs() < 1e-10);
        assert!(exact_fan(&g, &d, 0.0, 0.0).is_err());
    }

    #[test]
    fn burgers_initial_shape() {
        let p = SmoothFanParams::new(-1.0, 1.0, 0.1).unwrap();
        assert!(burgers_initial(&p, 0.0).abs() < 1e-15);
        assert!((burgers_initial(&p, 100.0) - 1.0).abs() < 1e-12);
        assert!((burgers_initial(&p, -100.0) + 1.0).abs() < 1e-12);
        // B0'(0) = (B+ - B-)/(2 delta)
        let d1 = initial_derivatives(&p, 0.0).1;
        assert!((d1 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn burgers_characteristics() {
        let p = SmoothFanParams::new(-1.0, 1.0, 0.1).unwrap();
        // t = 0 reproduces the data
        for x in [-0.5, 0.0, 0.3] {
            let s = burgers_smooth(&p, 0.0, x).unwrap();
            assert!((s.b - burgers_initial(&p, x)).abs() < 1e-14);
        }
        // the characteristic through x0 = 0 stays at 0; Bx = 10/11 there
        let s = burgers_smooth(&p, 1.0, 0.0).unwrap();
        assert!(s.b.abs() < 1e-12);
        assert!((s.bx - 10.0 / 11.0).abs() < 1e-10, "bx = {}", s.bx);
        assert!(s.bx > 0.0);
    }

    #[test]
    fn burgers_residual_second_order() {
        let p = SmoothFanParams::new(-1.0, 1.0, 0.2).unwrap();
        let residual = |h: f64| {
            let mut worst = 0.0f64;
            for i in 0..40 {
                let x = -1.0 + i as f64 * 0.05;
                let t = 0.5;
                let b = burgers_smooth(&p, t, x).unwrap();
                let bt = (burgers_smooth(&p, t + h, x).unwrap().b
                    - burgers_smooth(&p, t - h, x).unwrap().b)
                    / (2.0 * h);
                let bx = (burgers_smooth(&p, t, x + h).unwrap().b
                    - burgers_smooth(&p, t, x - h).unwrap().b)
                    / (2.0 * h);
                worst = worst.max((bt + b.b * bx).abs());
            }
            worst
        };
        let (r1, r2) = (residual(1e-3), residual(5e-4));
        let order = (r1 / r2).log2();
        assert!(order > 1.9, "order = {order}, residuals {r1}, {r2}");
    }

    #[test]
    fn burgers_derivatives_match_finite_differences() {
        let p = SmoothFanParams::new(-1.0, 1.0, 0.15).unwrap();
        let t = 0.7;
        for x in [-0.2, 0.05, 0.4] {
            let s = burgers_smooth(&p, t, x).unwrap();
            let h = 1e-4;
            let sp = burgers_smooth(&p, t, x + h).unwrap();
            let sm = burgers_smooth(&p, t, x - h).unwrap();
            assert!(((sp.b - sm.b) / (2.0 * h) - s.bx).abs() < 1e-6);
            assert!(((sp.bx - sm.bx) / (2.0 * h) - s.bxx).abs() < 1e-4);
            assert!(((sp.bxx - sm.bxx) / (2.0 * h) - s.bxxx).abs() < 2e-2);
        }
    }

    #[test]
    fn smooth_wave_derivative_identities() {
        let g = gas();
        let d = data();
        let params = SmoothFanParams::for_data(&g, &d, 0.1).unwrap();
        for (t, x) in [(0.0, 0.0), (0.5, 0.3), (1.0, 1.2)] {
            let s = smooth_rarefaction(&g, &d, &params, t, x).unwrap();
            // Lemma-style identities
            assert!((s.d1[1] / s.b.bx - 2.0 / (g.gamma + 1.0)).abs() < 1e-12);
            let expect_theta_x =
                (g.gamma - 1.0) / (g.gamma * g.r).sqrt() * s.state.theta.sqrt() * s.d1[1];
            assert!((s.d1[2] - expect_theta_x).abs() < 1e-12);
            // monotonicity
            assert!(s.d1[0] > 0.0 && s.d1[1] > 0.0 && s.d1[2] > 0.0);
            // rho_x normalization constant from the right state
            let c_norm = 1.0
                / (g.r * g.gamma * d.right.rho.powf(1.0 - g.gamma) * d.right.theta).sqrt();
            let ratio = s.d1[0] / (s.state.rho.powf((3.0 - g.gamma) / 2.0) * s.d1[1]);
            assert!((ratio - c_norm).abs() / c_norm < 1e-10, "ratio {ratio} vs {c_norm}");
        }
    }

    #[test]
    fn smooth_wave_invariants_constant_on_grid() {
        let g = gas();
        let d = data();
        let params = SmoothFanParams::for_data(&g, &d, 0.2).unwrap();
        let grid = Grid1::for_fan(&params, 1.0, 24).unwrap();
        let (sig_ref, s_ref) = riemann_invariants_3(&g, &d.left).unwrap();
        for x in grid.centers() {
            let s = smooth_rarefaction(&g, &d, &params, 1.0, x).unwrap();
            let (sig, ent) = riemann_invariants_3(&g, &s.state).unwrap();
            assert!((sig - sig_ref).abs() < 1e-9);
            assert!((ent - s_ref).abs() < 1e-9);
        }
    }

    // The smooth wave solves the 1D Euler system; check with central
    // differences in t and x.
    #[test]
    fn smooth_wave_euler_residual() {
        let g = gas();
        let d = data();
        let params = SmoothFanParams::for_data(&g, &d, 0.2).unwrap();
        let residual = |h: f64| {
            let mut worst = 0.0f64;
            for i in 0..30 {
                let x = -0.5 + i as f64 * 0.1;
                let t = 0.5;
                let cons = |t: f64, x: f64| {
                    let s = smooth_rarefaction(&g, &d, &params, t, x).unwrap();
                    let c = sample_conserved(&g, &s);
                    (c, gas::euler_flux(&g, &c).unwrap())
                };
                let (up, _) = cons(t + h, x);
                let (um, _) = cons(t - h, x);
                let (_, fp) = cons(t, x + h);
                let (_, fm) = cons(t, x - h);
                for k in 0..3 {
                    let ut = match k {
                        0 => (up.rho - um.rho) / (2.0 * h),
                        1 => (up.m1 - um.m1) / (2.0 * h),
                        _ => (up.energy - um.energy) / (2.0 * h),
                    };
                    let fx = (fp[k] - fm[k]) / (2.0 * h);
                    worst = worst.max((ut + fx).abs());
                }
            }
            worst
        };
        let (r1, r2) = (residual(1e-3), residual(5e-4));
        assert!(r2 < r1 / 3.0, "residuals {r1}, {r2}");
        assert!(r1 < 1e-4);
    }

    #[test]
    fn far_field_limits() {
        let g = gas();
        let d = data();
        let params = SmoothFanParams::for_data(&g, &d, 0.1).unwrap();
        let s = smooth_rarefaction(&g, &d, &params, 0.5, -50.0).unwrap();
        assert!((s.state.rho - d.left.rho).abs() < 1e-10);
        assert!((s.state.v1 - d.left.v1).abs() < 1e-10);
        let s = smooth_rarefaction(&g, &d, &params, 0.5, 50.0).unwrap();
        assert!((s.state.rho - d.right.rho).abs() < 1e-10);
    }

    #[test]
    fn norm_table_reference_values() {
        let g = gas();
        let d = data();
        let delta = 0.1;
        let params = SmoothFanParams::for_data(&g, &d, delta).unwrap();
        let grid = Grid1::for_fan(&params, 0.0, 32).unwrap();
        let table =
            derivative_norm_table(&g, &d, &params, 0.0, &[LpNorm::L1, LpNorm::LInf], &grid)
                .unwrap();
        // max first-derivative component at t=0; v1x = 2/(gamma+1) B0'(0) but
        // rho_x is the largest component here, so check v1x via the field
        let s0 = smooth_rarefaction(&g, &d, &params, 0.0, 0.0).unwrap();
        let expect = 2.0 / (g.gamma + 1.0) * (params.b_plus - params.b_minus) / (2.0 * delta);
        assert!((s0.d1[1] - expect).abs() < 1e-10);
        // L1 of v1_x integrates to (2/(gamma+1)) (B+ - B-) regardless of delta
        let mut l1 = 0.0;
        for x in grid.centers() {
            l1 += smooth_rarefaction(&g, &d, &params, 0.0, x).unwrap().d1[1] * grid.dx();
        }
        let expect_l1 = 2.0 / (g.gamma + 1.0) * (params.b_plus - params.b_minus);
        assert!((l1 - expect_l1).abs() < 1e-8, "l1 = {l1}, expect {expect_l1}");
        assert!(table.get(1, LpNorm::LInf).unwrap().value > 0.0);
        // halving delta doubles the sup of the first derivative
        let params2 = SmoothFanParams::for_data(&g, &d, delta / 2.0).unwrap();
        let grid2 = Grid1::for_fan(&params2, 0.0, 32).unwrap();
        let t2 = derivative_norm_table(&g, &d, &params2, 0.0, &[LpNorm::LInf], &grid2).unwrap();
        let ratio = table.get(1, LpNorm::LInf).unwrap().value / t2.get(1, LpNorm::LInf).unwrap().value;
        assert!((ratio - 0.5).abs() < 0.025, "ratio = {ratio}");
    }

    #[test]
    fn under_resolved_grid_rejected() {
        let g = gas();
        let d = data();
        let params = SmoothFanParams::for_data(&g, &d, 0.01).unwrap();
        let grid = Grid1::new(-2.0, 2.0, 100).unwrap();
        assert!(matches!(
            derivative_norm_table(&g, &d, &params, 0.0, &[LpNorm::L2], &grid),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn fan_distance_envelope() {
        let g = gas();
        let d = data();
        let t = 1.0;
        let mut ratios = Vec::new();
        for delta in [0.1, 0.05, 0.025] {
            let params = SmoothFanParams::for_data(&g, &d, delta).unwrap();
            let grid = Grid1::for_fan(&params, t, 32).unwrap();
            let dist = fan_distance(&g, &d, &params, t, &grid).unwrap();
            let envelope = delta * ((1.0f64 + t).ln() + delta.ln().abs()) / t;
            ratios.push(dist / envelope);
        }
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 2.0, "ratios {ratios:?}");
    }

    #[test]
    fn fan_distance_decays_in_time() {
        let g = gas();
        let d = data();
        let params = SmoothFanParams::for_data(&g, &d, 0.05).unwrap();
        let grid_near = Grid1::for_fan(&params, 1.0, 32).unwrap();
        let grid_far = Grid1::for_fan(&params, 20.0, 32).unwrap();
        let near = fan_distance(&g, &d, &params, 1.0, &grid_near).unwrap();
        let far = fan_distance(&g, &d, &params, 20.0, &grid_far).unwrap();
        assert!(far < near / 5.0, "near {near}, far {far}");
    }
}
