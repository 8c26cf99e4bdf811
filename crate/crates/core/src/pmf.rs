//! Dense exact joint distributions over named finite axes, and the
//! conditional channels (mechanisms) that extend them.

use crate::alphabet::{Alphabet, AxisSpec, Role};
use crate::error::{Error, Result};
use crate::prob::Prob;

/// Tolerance on total mass in float mode. Exact mode requires equality.
pub const FLOAT_MASS_TOL: f64 = 1e-12;
/// Tolerance on conditional-row sums in float mode.
pub const FLOAT_ROW_TOL: f64 = 1e-9;

/// A joint probability mass function over one or more named axes.
///
/// Mass is stored densely in row-major order of the axis list. Axes carry
/// a [`Role`] tag; roles are unique within a joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<P: Prob> {
    axes: Vec<AxisSpec>,
    strides: Vec<usize>,
    mass: Vec<P>,
}

fn strides_for(axes: &[AxisSpec]) -> Vec<usize> {
    let mut strides = vec![1usize; axes.len()];
    for i in (0..axes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * axes[i + 1].alphabet.size();
    }
    strides
}

impl<P: Prob> JointPmf<P> {
    /// Validates axis uniqueness, nonnegativity, and normalization.
    pub fn new(axes: Vec<AxisSpec>, mass: Vec<P>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Invalid("joint needs at least one axis".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.role == a.role) {
                return Err(Error::Invalid(format!("duplicate axis role {}", a.role)));
            }
        }
        let want: usize = axes.iter().map(|a| a.alphabet.size()).product();
        if mass.len() != want {
            return Err(Error::Invalid(format!(
                "mass has {} entries, axes describe {}",
                mass.len(),
                want
            )));
        }
        let strides = strides_for(&axes);
        let pmf = JointPmf { axes, strides, mass };
        for (flat, p) in pmf.mass.iter().enumerate() {
            if *p < P::zero() {
                return Err(Error::NegativeMass {
                    cell: pmf.cell_label(flat),
                    value: format!("{p}"),
                });
            }
        }
        let total = pmf.total();
        let ok = if P::EXACT {
            total == P::one()
        } else {
            (total.to_f64() - 1.0).abs() <= FLOAT_MASS_TOL
        };
        if !ok {
            return Err(Error::NonNormalized {
                total: total.render(),
            });
        }
        Ok(pmf)
    }

    pub fn from_fn(axes: Vec<AxisSpec>, mut f: impl FnMut(&[usize]) -> P) -> Result<Self> {
        let len: usize = axes.iter().map(|a| a.alphabet.size()).product();
        let strides = strides_for(&axes);
        let mut idx = vec![0usize; axes.len()];
        let mut mass = Vec::with_capacity(len);
        for flat in 0..len {
            for (a, stride) in strides.iter().enumerate() {
                idx[a] = (flat / stride) % axes[a].alphabet.size();
            }
            mass.push(f(&idx));
        }
        JointPmf::new(axes, mass)
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn roles(&self) -> Vec<Role> {
        self.axes.iter().map(|a| a.role).collect()
    }

    pub fn axis_position(&self, role: Role) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.role == role)
            .ok_or(Error::UnknownAxis(role))
    }

    pub fn alphabet(&self, role: Role) -> Result<&Alphabet> {
        Ok(&self.axes[self.axis_position(role)?].alphabet)
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[P] {
        &self.mass
    }

    pub fn total(&self) -> P {
        let mut acc = P::zero();
        for p in &self.mass {
            acc = acc + p.clone();
        }
        acc
    }

    /// Digit of `flat` along axis `a`.
    #[inline]
    pub fn digit(&self, flat: usize, a: usize) -> usize {
        (flat / self.strides[a]) % self.axes[a].alphabet.size()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.axes.len());
        idx.iter()
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum::<usize>()
    }

    pub fn value(&self, idx: &[usize]) -> &P {
        &self.mass[self.flat_index(idx)]
    }

    fn cell_label(&self, flat: usize) -> String {
        let parts: Vec<String> = (0..self.axes.len())
            .map(|a| {
                format!(
                    "{}={}",
                    self.axes[a].role,
                    self.axes[a].alphabet.symbol(self.digit(flat, a))
                )
            })
            .collect();
        format!("({})", parts.join(", "))
    }

    /// Visit every cell with its multi-index.
    pub fn for_each_cell(&self, mut f: impl FnMut(&[usize], &P)) {
        let mut idx = vec![0usize; self.axes.len()];
        for (flat, p) in self.mass.iter().enumerate() {
            for a in 0..self.axes.len() {
                idx[a] = self.digit(flat, a);
            }
            f(&idx, p);
        }
    }

    /// Marginal over `roles`, in this joint's own axis order.
    pub fn marginal(&self, roles: &[Role]) -> Result<JointPmf<P>> {
        let keep = self.axis_ids(roles)?;
        let axes: Vec<AxisSpec> = keep.iter().map(|&a| self.axes[a].clone()).collect();
        let strides = strides_for(&axes);
        let len: usize = axes.iter().map(|a| a.alphabet.size()).product();
        let mut mass = vec![P::zero(); len];
        for (flat, p) in self.mass.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let mut out = 0usize;
            for (k, &a) in keep.iter().enumerate() {
                out += self.digit(flat, a) * strides[k];
            }
            mass[out] = mass[out].clone() + p.clone();
        }
        Ok(JointPmf { axes, strides, mass })
    }

    /// Positions of `roles` in this joint, in this joint's axis order.
    /// Rejects unknown or repeated roles.
    pub fn axis_ids(&self, roles: &[Role]) -> Result<Vec<usize>> {
        let mut ids = Vec::with_capacity(roles.len());
        for &r in roles {
            let a = self.axis_position(r)?;
            if ids.contains(&a) {
                return Err(Error::InvalidQuery(format!("role {r} repeated")));
            }
            ids.push(a);
        }
        ids.sort_unstable();
        Ok(ids)
    }

    /// Same distribution with axes listed in `order`.
    pub fn permuted(&self, order: &[Role]) -> Result<JointPmf<P>> {
        if order.len() != self.axes.len() {
            return Err(Error::InvalidQuery(
                "permutation must list every axis".into(),
            ));
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|&r| self.axis_position(r))
            .collect::<Result<_>>()?;
        {
            let mut seen = positions.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != positions.len() {
                return Err(Error::InvalidQuery("permutation repeats a role".into()));
            }
        }
        let axes: Vec<AxisSpec> = positions.iter().map(|&a| self.axes[a].clone()).collect();
        let strides = strides_for(&axes);
        let mut mass = vec![P::zero(); self.mass.len()];
        for (flat, p) in self.mass.iter().enumerate() {
            let mut out = 0usize;
            for (k, &a) in positions.iter().enumerate() {
                out += self.digit(flat, a) * strides[k];
            }
            mass[out] = p.clone();
        }
        Ok(JointPmf { axes, strides, mass })
    }

    /// Replace the symbol labels of one axis (sizes must match).
    pub fn relabeled(&self, role: Role, alphabet: Alphabet) -> Result<JointPmf<P>> {
        let a = self.axis_position(role)?;
        if alphabet.size() != self.axes[a].alphabet.size() {
            return Err(Error::AlphabetMismatch(format!(
                "axis {role} has {} symbols, replacement has {}",
                self.axes[a].alphabet.size(),
                alphabet.size()
            )));
        }
        let mut axes = self.axes.clone();
        axes[a].alphabet = alphabet;
        Ok(JointPmf {
            axes,
            strides: self.strides.clone(),
            mass: self.mass.clone(),
        })
    }

    /// Append a new axis distributed according to `kernel`, conditionally on
    /// the existing cell. `kernel(idx, k)` is `P(new = k | cell = idx)`; rows
    /// must sum to one wherever the cell has positive mass.
    pub fn compose(
        &self,
        new_axis: AxisSpec,
        mut kernel: impl FnMut(&[usize], usize) -> P,
    ) -> Result<JointPmf<P>> {
        if self.axes.iter().any(|a| a.role == new_axis.role) {
            return Err(Error::Invalid(format!(
                "axis {} already present",
                new_axis.role
            )));
        }
        let n_new = new_axis.alphabet.size();
        let mut axes = self.axes.clone();
        axes.push(new_axis);
        let mut mass = Vec::with_capacity(self.mass.len() * n_new);
        let mut idx = vec![0usize; self.axes.len()];
        for (flat, p) in self.mass.iter().enumerate() {
            if p.is_zero() {
                // Kernel rows of zero-mass cells never matter.
                for _ in 0..n_new {
                    mass.push(P::zero());
                }
                continue;
            }
            for a in 0..self.axes.len() {
                idx[a] = self.digit(flat, a);
            }
            let mut row_total = P::zero();
            for k in 0..n_new {
                let w = kernel(&idx, k);
                if w.is_zero() {
                    mass.push(P::zero());
                } else {
                    row_total = row_total + w.clone();
                    mass.push(p.clone() * w);
                }
            }
            let ok = if P::EXACT {
                row_total == P::one()
            } else {
                (row_total.to_f64() - 1.0).abs() <= FLOAT_ROW_TOL
            };
            if !ok {
                return Err(Error::NonNormalized {
                    total: row_total.render(),
                });
            }
        }
        let strides = strides_for(&axes);
        Ok(JointPmf { axes, strides, mass })
    }

    pub fn map_values<Q: Prob>(&self, f: impl Fn(&P) -> Q) -> JointPmf<Q> {
        JointPmf {
            axes: self.axes.clone(),
            strides: self.strides.clone(),
            mass: self.mass.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> JointPmf<f64> {
        self.map_values(|p| p.to_f64())
    }
}

/// A conditional channel `P(Y | S, X, T)` on finite alphabets: the artifact's
/// central output. Rows are indexed by `(s, x, t)`, columns by `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism<P: Prob> {
    s: Alphabet,
    x: Alphabet,
    t: Alphabet,
    output: Alphabet,
    kernel: Vec<P>,
}

impl<P: Prob> Mechanism<P> {
    pub fn new(
        s: Alphabet,
        x: Alphabet,
        t: Alphabet,
        output: Alphabet,
        kernel: Vec<P>,
    ) -> Result<Self> {
        let rows = s.size() * x.size() * t.size();
        let cols = output.size();
        if kernel.len() != rows * cols {
            return Err(Error::Invalid(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                rows * cols
            )));
        }
        for (i, k) in kernel.iter().enumerate() {
            if *k < P::zero() {
                return Err(Error::NegativeMass {
                    cell: format!("kernel row {} col {}", i / cols, i % cols),
                    value: format!("{k}"),
                });
            }
        }
        for row in 0..rows {
            let mut total = P::zero();
            for col in 0..cols {
                total = total + kernel[row * cols + col].clone();
            }
            let ok = if P::EXACT {
                total == P::one()
            } else {
                (total.to_f64() - 1.0).abs() <= FLOAT_ROW_TOL
            };
            if !ok {
                return Err(Error::NonNormalized {
                    total: total.render(),
                });
            }
        }
        Ok(Mechanism {
            s,
            x,
            t,
            output,
            kernel,
        })
    }

    pub fn from_fn(
        s: Alphabet,
        x: Alphabet,
        t: Alphabet,
        output: Alphabet,
        mut f: impl FnMut(usize, usize, usize, usize) -> P,
    ) -> Result<Self> {
        let mut kernel = Vec::with_capacity(s.size() * x.size() * t.size() * output.size());
        for si in 0..s.size() {
            for xi in 0..x.size() {
                for ti in 0..t.size() {
                    for yi in 0..output.size() {
                        kernel.push(f(si, xi, ti, yi));
                    }
                }
            }
        }
        Mechanism::new(s, x, t, output, kernel)
    }

    /// The constant mechanism: `Y` is a fixed single symbol regardless of
    /// the input. Always feasible for both design problems.
    pub fn constant(s: Alphabet, x: Alphabet, t: Alphabet) -> Self {
        let output = Alphabet::new(["const"]).expect("nonempty");
        let rows = s.size() * x.size() * t.size();
        Mechanism {
            s,
            x,
            t,
            output,
            kernel: vec![P::one(); rows],
        }
    }

    /// Deterministic mechanism `y = f(s, x, t)`.
    pub fn deterministic(
        s: Alphabet,
        x: Alphabet,
        t: Alphabet,
        output: Alphabet,
        f: impl Fn(usize, usize, usize) -> usize,
    ) -> Result<Self> {
        Mechanism::from_fn(s, x, t, output, |si, xi, ti, yi| {
            if f(si, xi, ti) == yi {
                P::one()
            } else {
                P::zero()
            }
        })
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn input_alphabets(&self) -> (&Alphabet, &Alphabet, &Alphabet) {
        (&self.s, &self.x, &self.t)
    }

    pub fn kernel(&self) -> &[P] {
        &self.kernel
    }

    #[inline]
    pub fn kernel_value(&self, si: usize, xi: usize, ti: usize, yi: usize) -> &P {
        let cols = self.output.size();
        let row = (si * self.x.size() + xi) * self.t.size() + ti;
        &self.kernel[row * cols + yi]
    }

    /// Compose a source `P(S,X,T)` with this channel into `P(S,X,T,Y)`.
    pub fn induce(&self, source: &JointPmf<P>) -> Result<JointPmf<P>> {
        let s_pos = source.axis_position(Role::S)?;
        let x_pos = source.axis_position(Role::X)?;
        let t_pos = source.axis_position(Role::T)?;
        if source.axes().len() != 3 {
            return Err(Error::AlphabetMismatch(
                "source must have exactly the axes (S, X, T)".into(),
            ));
        }
        let same = source.axes()[s_pos].alphabet == self.s
            && source.axes()[x_pos].alphabet == self.x
            && source.axes()[t_pos].alphabet == self.t;
        if !same {
            return Err(Error::AlphabetMismatch(
                "mechanism input alphabets differ from the source".into(),
            ));
        }
        source.compose(AxisSpec::new(Role::Y, self.output.clone()), |idx, yi| {
            self.kernel_value(idx[s_pos], idx[x_pos], idx[t_pos], yi).clone()
        })
    }

    pub fn map_values<Q: Prob>(&self, f: impl Fn(&P) -> Q) -> Mechanism<Q> {
        Mechanism {
            s: self.s.clone(),
            x: self.x.clone(),
            t: self.t.clone(),
            output: self.output.clone(),
            kernel: self.kernel.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Mechanism<f64> {
        self.map_values(|p| p.to_f64())
    }
}
