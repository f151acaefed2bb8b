//! Piecewise-linear Galerkin semi-discretization of 1D advection-diffusion
//! on `(0, 1)` with flux boundary conditions and optional SUPG.
//!
//! Weak form, for every basis function `w`:
//!
//! ```text
//! ∫ u' w - ∫ (a u - κ u_x) w_x + Σ_{out} (a·n) u w + S(u, w) = ∫ f w + Σ_{Γ} h w
//! ```
//!
//! The outflow boundary is where `a·n >= 0`; in 1D the boundary integrals
//! are point evaluations at `x = 0` (n = -1) and `x = 1` (n = +1).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{check_dim, Error, Result};
use crate::integrator::ResidualSystem;
use crate::newton::solve_dense;
use crate::quadrature::GaussRule;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Uniform mesh of `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub n_elements: usize,
    pub dx: f64,
    pub nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn uniform(n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::Domain("mesh needs at least one element".into()));
        }
        let dx = 1.0 / n_elements as f64;
        let nodes = (0..=n_elements).map(|i| i as f64 * dx).collect();
        Ok(Self {
            n_elements,
            dx,
            nodes,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elements + 1
    }

    /// Physical coordinate of reference point `xi` in element `e`.
    pub fn map(&self, e: usize, xi: f64) -> f64 {
        self.nodes[e] + xi * self.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stabilization {
    None,
    /// SUPG with the transient `tau` built from the given time increment.
    Supg {
        dt: f64,
    },
}

#[derive(Clone)]
pub struct AdvDiffConfig {
    pub a: f64,
    pub kappa: f64,
    /// Body force `f(x, t)`.
    pub f: SpaceTimeFn,
    /// Applied flux `h` at `x = 0`.
    pub h_left: TimeFn,
    /// Applied flux `h` at `x = 1`.
    pub h_right: TimeFn,
    pub u0: SpaceFn,
    pub stabilization: Stabilization,
}

impl fmt::Debug for AdvDiffConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdvDiffConfig")
            .field("a", &self.a)
            .field("kappa", &self.kappa)
            .field("stabilization", &self.stabilization)
            .finish_non_exhaustive()
    }
}

impl AdvDiffConfig {
    /// No forcing, zero boundary flux, zero initial data.
    pub fn homogeneous(a: f64, kappa: f64) -> Self {
        Self {
            a,
            kappa,
            f: Arc::new(|_, _| 0.0),
            h_left: Arc::new(|_| 0.0),
            h_right: Arc::new(|_| 0.0),
            u0: Arc::new(|_| 0.0),
            stabilization: Stabilization::None,
        }
    }

    pub fn with_forcing(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self
    }

    pub fn with_boundary_flux(
        mut self,
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.h_left = Arc::new(left);
        self.h_right = Arc::new(right);
        self
    }

    pub fn with_initial(mut self, u0: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.u0 = Arc::new(u0);
        self
    }

    pub fn with_stabilization(mut self, stabilization: Stabilization) -> Self {
        self.stabilization = stabilization;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::Configuration(format!(
                "advection velocity {} is not finite",
                self.a
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Configuration(format!(
                "diffusivity must be positive, got {}",
                self.kappa
            )));
        }
        if let Stabilization::Supg { dt } = self.stabilization {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Configuration(format!(
                    "SUPG time increment must be positive, got {dt}"
                )));
            }
        }
        Ok(())
    }
}

/// Transient SUPG parameter
/// `((2|a|/dx)^2 + (4 kappa/dx^2)^2 + (2/dt)^2)^(-1/2)`.
pub fn supg_tau(dx: f64, a: f64, kappa: f64, dt: f64) -> f64 {
    let adv = 2.0 * a.abs() / dx;
    let diff = 4.0 * kappa / (dx * dx);
    let time = 2.0 / dt;
    (adv * adv + diff * diff + time * time).sqrt().recip()
}

/// Element operators on one linear element, local node order (left, right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrices {
    /// `∫ phi_j phi_i`.
    pub mass: Matrix2<f64>,
    /// `∫ kappa phi_j' phi_i'`.
    pub diffusion: Matrix2<f64>,
    /// `-∫ a phi_j phi_i'`, the advective part of the weak form.
    pub advection: Matrix2<f64>,
}

pub struct AdvDiffSystem {
    mesh: Mesh1D,
    config: AdvDiffConfig,
    rule: GaussRule,
    tau: f64,
    element: ElementMatrices,
    mass: DMatrix<f64>,
    /// Consistent mass plus the SUPG rate term.
    rate_matrix: DMatrix<f64>,
    /// Advection, diffusion, outflow and SUPG terms acting on `u`.
    state_matrix: DMatrix<f64>,
    /// `1^T M`, the quadrature weights of the total quantity.
    mass_weights: DVector<f64>,
}

impl fmt::Debug for AdvDiffSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdvDiffSystem")
            .field("mesh", &self.mesh.n_elements)
            .field("config", &self.config)
            .field("tau", &self.tau)
            .finish_non_exhaustive()
    }
}

fn local_mass(dx: f64) -> Matrix2<f64> {
    Matrix2::new(2.0, 1.0, 1.0, 2.0) * (dx / 6.0)
}

fn add_element(global: &mut DMatrix<f64>, e: usize, local: &Matrix2<f64>) {
    for i in 0..2 {
        for j in 0..2 {
            global[(e + i, e + j)] += local[(i, j)];
        }
    }
}

/// `phi'` of the local shape functions on an element of length `dx`.
fn shape_slopes(dx: f64) -> [f64; 2] {
    [-1.0 / dx, 1.0 / dx]
}

pub fn build_advdiff_system(mesh: &Mesh1D, config: &AdvDiffConfig) -> Result<AdvDiffSystem> {
    AdvDiffSystem::new(mesh.clone(), config.clone())
}

impl AdvDiffSystem {
    pub fn new(mesh: Mesh1D, config: AdvDiffConfig) -> Result<Self> {
        config.validate()?;
        let dx = mesh.dx;
        let a = config.a;
        let tau = match config.stabilization {
            Stabilization::None => 0.0,
            Stabilization::Supg { dt } => supg_tau(dx, a, config.kappa, dt),
        };
        let element = ElementMatrices {
            mass: local_mass(dx),
            diffusion: Matrix2::new(1.0, -1.0, -1.0, 1.0) * (config.kappa / dx),
            advection: Matrix2::new(1.0, 1.0, -1.0, -1.0) * (0.5 * a),
        };
        let slopes = shape_slopes(dx);
        // SUPG: tau a phi_i' (u' + a u_x); phi_i' is constant per element.
        let supg_rate = Matrix2::from_fn(|i, _| tau * a * slopes[i] * 0.5 * dx);
        let supg_state = Matrix2::from_fn(|i, j| tau * a * a * slopes[i] * slopes[j] * dx);

        let n = mesh.n_nodes();
        let mut mass = DMatrix::zeros(n, n);
        let mut rate_matrix = DMatrix::zeros(n, n);
        let mut state_matrix = DMatrix::zeros(n, n);
        for e in 0..mesh.n_elements {
            add_element(&mut mass, e, &element.mass);
            add_element(&mut rate_matrix, e, &(element.mass + supg_rate));
            add_element(
                &mut state_matrix,
                e,
                &(element.diffusion + element.advection + supg_state),
            );
        }
        // Outflow: (a·n) u w where a·n >= 0.
        if a >= 0.0 {
            state_matrix[(n - 1, n - 1)] += a;
        }
        if -a >= 0.0 {
            state_matrix[(0, 0)] += -a;
        }
        let mass_weights = mass.row_sum().transpose();
        Ok(Self {
            mesh,
            config,
            rule: GaussRule::two_point(),
            tau,
            element,
            mass,
            rate_matrix,
            state_matrix,
            mass_weights,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn config(&self) -> &AdvDiffConfig {
        &self.config
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn element_matrices(&self) -> &ElementMatrices {
        &self.element
    }

    pub fn mass_matrix(&self) -> &DMatrix<f64> {
        &self.mass
    }

    /// `∫ f phi_i + tau a phi_i' ∫_e f + h` boundary loads at time `t`.
    pub fn load_vector(&self, t: f64) -> DVector<f64> {
        let dx = self.mesh.dx;
        let slopes = shape_slopes(dx);
        let mut load = DVector::zeros(self.mesh.n_nodes());
        for e in 0..self.mesh.n_elements {
            let mut local = [0.0; 2];
            let mut f_total = 0.0;
            for (xi, w) in self.rule.iter() {
                let fx = (self.config.f)(self.mesh.map(e, xi), t) * w * dx;
                local[0] += fx * (1.0 - xi);
                local[1] += fx * xi;
                f_total += fx;
            }
            for i in 0..2 {
                load[e + i] += local[i] + self.tau * self.config.a * slopes[i] * f_total;
            }
        }
        let last = self.mesh.n_elements;
        load[0] += (self.config.h_left)(t);
        load[last] += (self.config.h_right)(t);
        load
    }

    /// `∫ f dΩ + h(0) + h(1)` with the residual's quadrature.
    pub fn load_integral(&self, t: f64) -> f64 {
        let dx = self.mesh.dx;
        let body: f64 = (0..self.mesh.n_elements)
            .map(|e| {
                self.rule
                    .iter()
                    .map(|(xi, w)| (self.config.f)(self.mesh.map(e, xi), t) * w * dx)
                    .sum::<f64>()
            })
            .sum();
        body + (self.config.h_left)(t) + (self.config.h_right)(t)
    }

    /// `S(u, w)`, accumulated element by element so that constant `w`
    /// cancels exactly.
    pub fn stabilization_form(
        &self,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
        w: &DVector<f64>,
    ) -> Result<f64> {
        let n = self.mesh.n_nodes();
        check_dim(n, u.len())?;
        check_dim(n, u_dot.len())?;
        check_dim(n, w.len())?;
        let dx = self.mesh.dx;
        let a = self.config.a;
        let mut total = 0.0;
        for e in 0..self.mesh.n_elements {
            let mut strong = a * (u[e + 1] - u[e]);
            for (xi, wq) in self.rule.iter() {
                let rate = u_dot[e] * (1.0 - xi) + u_dot[e + 1] * xi;
                strong += (rate - (self.config.f)(self.mesh.map(e, xi), t)) * wq * dx;
            }
            total += self.tau * a * strong * (w[e + 1] - w[e]) / dx;
        }
        Ok(total)
    }

    /// `(a·n) u` summed over the outflow points `a·n >= 0`.
    pub fn outflow_flux(&self, u: &DVector<f64>, _t: f64) -> Result<f64> {
        check_dim(self.mesh.n_nodes(), u.len())?;
        let a = self.config.a;
        let right = if a >= 0.0 {
            a * u[self.mesh.n_elements]
        } else {
            0.0
        };
        let left = if -a >= 0.0 { -a * u[0] } else { 0.0 };
        Ok(right + left)
    }

    /// `∫ u^h dΩ = 1^T M u`.
    pub fn total_quantity(&self, u: &DVector<f64>) -> Result<f64> {
        check_dim(self.mesh.n_nodes(), u.len())?;
        Ok(self.mass_weights.dot(u))
    }

    /// L2 projection of the configured initial condition.
    pub fn initial_condition(&self) -> Result<DVector<f64>> {
        project_initial(&self.mesh, |x| (self.config.u0)(x))
    }
}

/// Solves `M c = b`, `b_i = ∫ u0 phi_i`, with two-point Gauss quadrature.
pub fn project_initial(mesh: &Mesh1D, u0: impl Fn(f64) -> f64) -> Result<DVector<f64>> {
    let n = mesh.n_nodes();
    let dx = mesh.dx;
    let mut mass = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let local = local_mass(dx);
    for e in 0..mesh.n_elements {
        add_element(&mut mass, e, &local);
        for (xi, w) in GaussRule::two_point().iter() {
            let v = u0(mesh.map(e, xi)) * w * dx;
            rhs[e] += v * (1.0 - xi);
            rhs[e + 1] += v * xi;
        }
    }
    solve_dense(mass, &rhs)
}

pub fn total_quantity(system: &AdvDiffSystem, u: &DVector<f64>) -> Result<f64> {
    system.total_quantity(u)
}

pub fn outflow_flux(system: &AdvDiffSystem, u: &DVector<f64>, t: f64) -> Result<f64> {
    system.outflow_flux(u, t)
}

impl ResidualSystem for AdvDiffSystem {
    fn dimension(&self) -> usize {
        self.mesh.n_nodes()
    }

    fn residual(&self, u_dot: &DVector<f64>, u: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let n = self.mesh.n_nodes();
        check_dim(n, u.len())?;
        check_dim(n, u_dot.len())?;
        Ok(&self.rate_matrix * u_dot + &self.state_matrix * u - self.load_vector(t))
    }

    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        c_u: f64,
        _u_dot: &DVector<f64>,
        _u: &DVector<f64>,
        _t: f64,
        direction: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim(self.mesh.n_nodes(), direction.len())?;
        Ok((&self.rate_matrix * direction) * c_dot + (&self.state_matrix * direction) * c_u)
    }

    fn iteration_matrix(
        &self,
        c_dot: f64,
        c_u: f64,
        _u_dot: &DVector<f64>,
        _u: &DVector<f64>,
        _t: f64,
    ) -> Result<DMatrix<f64>> {
        Ok(&self.rate_matrix * c_dot + &self.state_matrix * c_u)
    }
}
