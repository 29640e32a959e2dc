//! Contact forms and the lifted coframe on second-order jets.
//!
//! Over `J^2` with coordinates `x^i, u, u_i, u_ij` and group parameters
//! `a, b^i_k, c^i, f^{ik}, g_i, s_ij, w^k_ij, z_ijk`, with `B = b^{-1}`:
//!
//! ```text
//! Theta_0  = a th_0
//! Theta_i  = g_i Theta_0 + a B^k_i th_k
//! Xi^i     = c^i Theta_0 + f^{ik} Theta_k + b^i_k dx^k
//! Sigma_ij = s_ij Theta_0 + w^k_ij Theta_k + z_ijk Xi^k + a B^k_i B^l_j du_kl
//! ```
//!
//! where `th_0 = du - u_i dx^i` and `th_i = du_i - u_ij dx^j`. Here `B^k_i`
//! is the entry in row `k`, column `i` of `B`, so the sums contract the row
//! index of `B` (`sum_k B^k_i b^i_m = delta`).

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::algebra::{RationalExpr, Symbol};
use crate::covering::{family_symbol, Covering};
use crate::equation::EquationIdeal;
use crate::error::{Error, Result};
use crate::exterior::{annihilation_check, DifferentialForm};
use crate::jet::{JetContext, MultiIndex};
use crate::linalg;
use crate::report::{CheckResult, Status};

/// `(2n+1)(n+3)(n+1)/3`, the number of group parameters for `n`
/// independent variables.
pub fn h_dimension(n: usize) -> usize {
    (2 * n + 1) * (n + 3) * (n + 1) / 3
}

fn sorted_name(prefix: &str, idx: &[usize]) -> String {
    let mut idx = idx.to_vec();
    idx.sort_unstable();
    let digits: String = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("{prefix}{digits}")
}

#[derive(Clone, Debug)]
pub struct GroupParameters {
    pub n: usize,
    pub a: Symbol,
    pub b: Vec<Vec<Symbol>>,
    pub c: Vec<Symbol>,
    pub f: Vec<Vec<Symbol>>,
    pub g: Vec<Symbol>,
    pub s: Vec<Vec<Symbol>>,
    /// `w[k][i][j]`, symmetric in `i, j`.
    pub w: Vec<Vec<Vec<Symbol>>>,
    /// `z[i][j][k]`, totally symmetric.
    pub z: Vec<Vec<Vec<Symbol>>>,
    /// The inverse of `b`, as `adj(b) / det(b)`.
    pub big_b: Vec<Vec<RationalExpr>>,
}

impl GroupParameters {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("at least one independent variable is required".into()));
        }
        let sym = |name: String| Symbol::new(&name);
        let b: Vec<Vec<Symbol>> = (0..n)
            .map(|i| (0..n).map(|k| sym(format!("b{}{}", i + 1, k + 1))).collect())
            .collect();
        let pair = |p: &str| -> Vec<Vec<Symbol>> {
            (0..n)
                .map(|i| (0..n).map(|j| sym(sorted_name(p, &[i, j]))).collect())
                .collect()
        };
        let w = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| sym(format!("w{}_{}", k + 1, sorted_name("", &[i, j]))))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let z = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| sym(sorted_name("z", &[i, j, k]))).collect())
                    .collect()
            })
            .collect();
        let b_expr: Vec<Vec<RationalExpr>> = b
            .iter()
            .map(|row| row.iter().map(|s| RationalExpr::symbol(*s)).collect())
            .collect();
        let big_b = linalg::inverse(&b_expr)?;
        Ok(GroupParameters {
            n,
            a: sym("a".into()),
            b,
            c: (0..n).map(|i| sym(format!("c{}", i + 1))).collect(),
            f: pair("f"),
            g: (0..n).map(|i| sym(format!("g{}", i + 1))).collect(),
            s: pair("s"),
            w,
            z,
            big_b,
        })
    }

    /// Every distinct parameter symbol.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::from([self.a]);
        out.extend(self.b.iter().flatten());
        out.extend(&self.c);
        out.extend(self.f.iter().flatten());
        out.extend(&self.g);
        out.extend(self.s.iter().flatten());
        out.extend(self.w.iter().flatten().flatten());
        out.extend(self.z.iter().flatten().flatten());
        out
    }

    pub fn b_matrix(&self) -> Vec<Vec<RationalExpr>> {
        self.b
            .iter()
            .map(|row| row.iter().map(|s| RationalExpr::symbol(*s)).collect())
            .collect()
    }

    /// `B b - I == 0` entrywise.
    pub fn inverse_holds(&self) -> bool {
        let prod = linalg::mat_mul(&self.big_b, &self.b_matrix());
        prod.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, e)| *e == RationalExpr::integer((i == j) as i64))
        })
    }
}

/// `th_0 = du - u_i dx^i` and `th_i = du_i - u_ij dx^j` over the first
/// dependent variable of `ctx`.
pub fn build_contact_forms(ctx: &JetContext) -> Result<(DifferentialForm, Vec<DifferentialForm>)> {
    let n = ctx.dimension();
    let contact = |index: &MultiIndex| -> Result<DifferentialForm> {
        let mut terms = vec![(ctx.jet_symbol(0, index)?, RationalExpr::one())];
        for (i, &x) in ctx.independent().iter().enumerate() {
            terms.push((x, -ctx.jet(0, &index.with(i))?));
        }
        Ok(DifferentialForm::one_form(terms))
    };
    let th0 = contact(&MultiIndex::empty())?;
    let th = (0..n)
        .map(|i| contact(&MultiIndex::single(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok((th0, th))
}

/// Deliberate defects used as negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    None,
    /// `Theta_i = g_i Theta_0 + B^k_i th_k`, without the factor `a`.
    DropScaleInTheta,
}

#[derive(Clone, Debug)]
pub struct LiftedCoframe {
    ctx: Arc<JetContext>,
    params: GroupParameters,
    contact: (DifferentialForm, Vec<DifferentialForm>),
    pub theta0: DifferentialForm,
    pub theta: Vec<DifferentialForm>,
    pub xi: Vec<DifferentialForm>,
    /// `sigma[i][j]`, with `sigma[i][j] == sigma[j][i]`.
    pub sigma: Vec<Vec<DifferentialForm>>,
}

impl LiftedCoframe {
    /// The coframe over `x1, ..., xn` with dependent variable `u`.
    pub fn standard(n: usize) -> Result<Self> {
        let names: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::build(JetContext::new(&refs, &["u"], 2)?, Mutation::None)
    }

    /// Builds the coframe over the first dependent variable of `ctx`.
    pub fn build(ctx: Arc<JetContext>, mutation: Mutation) -> Result<Self> {
        if ctx.max_order() < 2 {
            return Err(Error::Invalid("the lifted coframe needs second-order jets".into()));
        }
        let n = ctx.dimension();
        let p = GroupParameters::new(n)?;
        let (th0, th) = build_contact_forms(&ctx)?;
        let a = RationalExpr::symbol(p.a);
        let e = RationalExpr::symbol;
        let theta0 = th0.scale(&a);
        let theta: Vec<DifferentialForm> = (0..n)
            .map(|i| {
                let scale = match mutation {
                    Mutation::None => a.clone(),
                    Mutation::DropScaleInTheta => RationalExpr::one(),
                };
                let mut form = theta0.scale(&e(p.g[i]));
                for (k, thk) in th.iter().enumerate() {
                    form = &form + &thk.scale(&(&scale * &p.big_b[k][i]));
                }
                form
            })
            .collect();
        let xi: Vec<DifferentialForm> = (0..n)
            .map(|i| {
                let mut form = theta0.scale(&e(p.c[i]));
                for (k, tk) in theta.iter().enumerate() {
                    form = &form + &tk.scale(&e(p.f[i][k]));
                }
                let dx = ctx
                    .independent()
                    .iter()
                    .enumerate()
                    .map(|(k, x)| (*x, e(p.b[i][k])));
                &form + &DifferentialForm::one_form(dx)
            })
            .collect();
        let mut sigma = vec![vec![DifferentialForm::zero(1); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut form = theta0.scale(&e(p.s[i][j]));
                for k in 0..n {
                    form = &form + &theta[k].scale(&e(p.w[k][i][j]));
                    form = &form + &xi[k].scale(&e(p.z[i][j][k]));
                }
                let mut second = Vec::new();
                for k in 0..n {
                    for l in 0..n {
                        let ukl = ctx.jet_symbol(0, &MultiIndex::new(vec![k, l]))?;
                        second.push((ukl, &(&a * &p.big_b[k][i]) * &p.big_b[l][j]));
                    }
                }
                form = &form + &DifferentialForm::one_form(second);
                sigma[i][j] = form.clone();
                sigma[j][i] = form;
            }
        }
        Ok(LiftedCoframe {
            ctx,
            params: p,
            contact: (th0, th),
            theta0,
            theta,
            xi,
            sigma,
        })
    }

    pub fn ctx(&self) -> &Arc<JetContext> {
        &self.ctx
    }

    pub fn params(&self) -> &GroupParameters {
        &self.params
    }

    pub fn contact_forms(&self) -> (&DifferentialForm, &[DifferentialForm]) {
        (&self.contact.0, &self.contact.1)
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// `(i, j)` with `i <= j`, in lexicographic order.
    pub fn sigma_indices(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
    }

    /// `Theta_0, Theta_i, Xi^i, Sigma_ij (i <= j)`.
    pub fn members(&self) -> Vec<&DifferentialForm> {
        let mut out = vec![&self.theta0];
        out.extend(&self.theta);
        out.extend(&self.xi);
        for (i, j) in self.sigma_indices() {
            out.push(&self.sigma[i][j]);
        }
        out
    }

    pub fn member_names(&self) -> Vec<String> {
        let tag = |i: usize| self.tag(i);
        let mut out = vec!["theta0".to_string()];
        out.extend((0..self.n()).map(|i| format!("theta_{}", tag(i))));
        out.extend((0..self.n()).map(|i| format!("xi^{}", tag(i))));
        for (i, j) in self.sigma_indices() {
            out.push(format!("sigma_{}{}", tag(i), tag(j)));
        }
        out
    }

    fn tag(&self, i: usize) -> String {
        let x = self.ctx.independent()[i].name();
        if self.ctx.independent().iter().all(|s| s.name().chars().count() == 1) {
            x.to_string()
        } else {
            (i + 1).to_string()
        }
    }

    /// The coordinate covectors of `J^2`: `dx^i, du, du_i, du_ij`.
    pub fn jet_covectors(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.ctx.independent().to_vec();
        for k in 0..=2 {
            for index in MultiIndex::all_of_order(self.n(), k) {
                out.push(self.ctx.jet_symbol(0, &index).expect("order 2 is in range"));
            }
        }
        out
    }

    /// The four structure congruences, each aggregated over its indices.
    pub fn structure_congruences(&self) -> Vec<Congruence> {
        let n = self.n();
        let theta_all: Vec<DifferentialForm> =
            std::iter::once(self.theta0.clone()).chain(self.theta.iter().cloned()).collect();
        let g_theta0 = normalized(std::slice::from_ref(&self.theta0));
        let g_theta = normalized(&theta_all);
        let mut with_xi = theta_all.clone();
        with_xi.extend(self.xi.iter().cloned());
        let g_theta_xi = normalized(&with_xi);
        let mut with_sigma = with_xi.clone();
        for (i, j) in self.sigma_indices() {
            with_sigma.push(self.sigma[i][j].clone());
        }
        let g_all = normalized(&with_sigma);

        let mut out = Vec::new();
        let mut omega = self.theta0.exterior_derivative();
        for i in 0..n {
            omega = &omega - &self.xi[i].wedge(&self.theta[i]);
        }
        out.push(Congruence::of("i", &[omega], &g_theta0));

        let mut forms = Vec::new();
        for i in 0..n {
            let mut omega = self.theta[i].exterior_derivative();
            for k in 0..n {
                omega = &omega - &self.xi[k].wedge(&self.sigma[i][k]);
            }
            forms.push(omega);
        }
        out.push(Congruence::of("ii", &forms, &g_theta));

        let forms: Vec<_> = self.xi.iter().map(|x| x.exterior_derivative()).collect();
        out.push(Congruence::of("iii", &forms, &g_theta_xi));

        let forms: Vec<_> = self
            .sigma_indices()
            .into_iter()
            .map(|(i, j)| self.sigma[i][j].exterior_derivative())
            .collect();
        out.push(Congruence::of("iv", &forms, &g_all));
        out
    }

    /// The coordinate 1-forms `th_0, th_i, dx^k, du_kl (k <= l)` in terms
    /// of which the coframe is built, paired with their expansion in the
    /// coframe members (coefficients indexed like [`Self::members`]).
    fn transition_inverse(&self) -> Result<Vec<(DifferentialForm, Vec<RationalExpr>)>> {
        let n = self.n();
        let p = &self.params;
        let m = 1 + 2 * n + n * (n + 1) / 2;
        let theta_at = |i: usize| 1 + i;
        let xi_at = |i: usize| 1 + n + i;
        let sigma_pos: HashMap<(usize, usize), usize> = self
            .sigma_indices()
            .into_iter()
            .enumerate()
            .map(|(k, ij)| (ij, 1 + 2 * n + k))
            .collect();
        let sigma_at = |i: usize, j: usize| sigma_pos[&(i.min(j), i.max(j))];
        let e = RationalExpr::symbol;
        let inv_a = RationalExpr::symbol(p.a).recip()?;
        let zero = || vec![RationalExpr::zero(); m];
        let add = |v: &mut Vec<RationalExpr>, at: usize, c: &RationalExpr| {
            v[at] = &v[at] + c;
        };

        let mut out = Vec::new();
        // th_0 = Theta_0 / a
        let mut v0 = zero();
        v0[0] = inv_a.clone();
        out.push((self.contact.0.clone(), v0));
        // th_k = (1/a) sum_i b^i_k (Theta_i - g_i Theta_0)
        for k in 0..n {
            let mut v = zero();
            for i in 0..n {
                let c = &inv_a * &e(p.b[i][k]);
                add(&mut v, theta_at(i), &c);
                add(&mut v, 0, &-(&c * &e(p.g[i])));
            }
            out.push((self.contact.1[k].clone(), v));
        }
        // dx^k = sum_i B^k_i (Xi^i - c^i Theta_0 - f^{im} Theta_m)
        for k in 0..n {
            let mut v = zero();
            for i in 0..n {
                let bki = &p.big_b[k][i];
                add(&mut v, xi_at(i), bki);
                add(&mut v, 0, &-(bki * &e(p.c[i])));
                for mm in 0..n {
                    add(&mut v, theta_at(mm), &-(bki * &e(p.f[i][mm])));
                }
            }
            out.push((DifferentialForm::differential(self.ctx.independent()[k]), v));
        }
        // du_kl = (1/a) sum_{i,j} b^i_k b^j_l R_ij, where
        // R_ij = Sigma_ij - s_ij Theta_0 - w^m_ij Theta_m - z_ijm Xi^m.
        for (k, l) in self.sigma_indices() {
            let mut v = zero();
            for i in 0..n {
                for j in 0..n {
                    let c = &(&inv_a * &e(p.b[i][k])) * &e(p.b[j][l]);
                    add(&mut v, sigma_at(i, j), &c);
                    add(&mut v, 0, &-(&c * &e(p.s[i][j])));
                    for mm in 0..n {
                        add(&mut v, theta_at(mm), &-(&c * &e(p.w[mm][i][j])));
                        add(&mut v, xi_at(mm), &-(&c * &e(p.z[i][j][mm])));
                    }
                }
            }
            let ukl = self.ctx.jet_symbol(0, &MultiIndex::new(vec![k, l]))?;
            out.push((DifferentialForm::differential(ukl), v));
        }
        Ok(out)
    }

    /// Linear dependencies among the members restricted to `eq`.
    ///
    /// The restricted coordinate forms `th_0, th_i, dx^k, du_kl` are
    /// eliminated fraction-free; each kernel vector is then carried to the
    /// coframe members through the exact inverse of the group transition,
    /// and the resulting combination is checked to vanish identically.
    pub fn find_dependencies(&self, eq: Option<&EquationIdeal>) -> Result<Vec<DependencyRecord>> {
        let pairs = self.transition_inverse()?;
        let restrict = |f: &DifferentialForm| -> Result<DifferentialForm> {
            match eq {
                Some(eq) => f.pullback_on_equation(eq.system()),
                None => Ok(f.clone()),
            }
        };
        let restricted: Vec<DifferentialForm> =
            pairs.iter().map(|(f, _)| restrict(f)).collect::<Result<_>>()?;
        let matrix = coefficient_matrix(&restricted);
        let kernel = linalg::left_kernel(&matrix)?;
        let members: Vec<DifferentialForm> = self
            .members()
            .into_iter()
            .map(restrict)
            .collect::<Result<_>>()?;
        let mut out = Vec::new();
        for z in kernel {
            let mut y = vec![RationalExpr::zero(); members.len()];
            for (zk, (_, inv)) in z.iter().zip(&pairs) {
                if zk.is_zero() {
                    continue;
                }
                for (yi, c) in y.iter_mut().zip(inv) {
                    if !c.is_zero() {
                        *yi = &*yi + &(zk * c);
                    }
                }
            }
            let parts: Vec<(RationalExpr, &DifferentialForm)> =
                y.iter().cloned().zip(&members).collect();
            let combo = DifferentialForm::linear_combination(&parts);
            if !combo.is_zero() {
                return Err(Error::Invalid(format!(
                    "dependency does not annihilate the restricted coframe: {combo}"
                )));
            }
            out.push(DependencyRecord::new(self.n(), y));
        }
        Ok(out)
    }
}

/// Rows: forms; columns: the union of their covectors in symbol order.
pub fn coefficient_matrix(forms: &[DifferentialForm]) -> Vec<Vec<RationalExpr>> {
    let mut covectors = BTreeSet::new();
    for f in forms {
        covectors.extend(f.covectors());
    }
    forms
        .iter()
        .map(|f| covectors.iter().map(|s| f.coefficient(&[*s])).collect())
        .collect()
}

/// Linear dependencies among arbitrary 1-forms, by direct fraction-free
/// elimination on their coefficient matrix.
pub fn linear_dependencies(forms: &[DifferentialForm]) -> Result<Vec<Vec<RationalExpr>>> {
    linalg::left_kernel(&coefficient_matrix(forms))
}

/// `g_1 ^ ... ^ g_m` divided by its first coefficient. Dividing by a
/// nonzero function does not change which forms it annihilates.
fn normalized(generators: &[DifferentialForm]) -> DifferentialForm {
    let mut acc = DifferentialForm::scalar(RationalExpr::one());
    for g in generators {
        acc = acc.wedge(g);
        let first = acc.terms().next().map(|(_, c)| c.clone());
        if let Some(c) = first {
            if !c.is_one() {
                acc = acc.scale(&c.recip().expect("stored coefficients are nonzero"));
            }
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct Congruence {
    pub name: &'static str,
    pub holds: bool,
    pub residual: DifferentialForm,
}

impl Congruence {
    fn of(name: &'static str, forms: &[DifferentialForm], generators: &DifferentialForm) -> Self {
        for f in forms {
            let a = annihilation_check(f, std::slice::from_ref(generators));
            if !a.holds {
                return Congruence {
                    name,
                    holds: false,
                    residual: a.residual,
                };
            }
        }
        Congruence {
            name,
            holds: true,
            residual: DifferentialForm::zero(0),
        }
    }
}

pub fn congruence_results(prefix: &str, congruences: &[Congruence]) -> Vec<CheckResult> {
    congruences
        .iter()
        .map(|c| {
            let id = format!("{prefix}.{}", c.name);
            if c.holds {
                CheckResult::pass(id)
            } else {
                CheckResult::new(id, Status::Fail, c.residual.to_string())
            }
        })
        .collect()
}

/// `E^0 theta_0 + E^i theta_i + F_i xi^i + G^{ij} sigma_ij = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyRecord {
    pub e0: RationalExpr,
    pub e: Vec<RationalExpr>,
    pub f: Vec<RationalExpr>,
    /// `g[k]` pairs with the `k`-th index of [`LiftedCoframe::sigma_indices`].
    pub g: Vec<RationalExpr>,
}

impl DependencyRecord {
    fn new(n: usize, y: Vec<RationalExpr>) -> Self {
        DependencyRecord {
            e0: y[0].clone(),
            e: y[1..1 + n].to_vec(),
            f: y[1 + n..1 + 2 * n].to_vec(),
            g: y[1 + 2 * n..].to_vec(),
        }
    }

    pub fn coefficients(&self) -> Vec<RationalExpr> {
        let mut out = vec![self.e0.clone()];
        out.extend(self.e.iter().cloned());
        out.extend(self.f.iter().cloned());
        out.extend(self.g.iter().cloned());
        out
    }
}

/// The invariant forms of the symmetry pseudo-group of
/// `u_yy = u_tx + (u_x^2/2 - u_y) u_xx`.
#[derive(Clone, Debug)]
pub struct MkhzForms {
    pub xi1: DifferentialForm,
    pub xi2: DifferentialForm,
    pub xi3: DifferentialForm,
    pub eta1: DifferentialForm,
}

pub struct MkhzSymbols {
    pub t: Symbol,
    pub x: Symbol,
    pub y: Symbol,
    pub u_x: Symbol,
    pub u_y: Symbol,
    pub u_xx: Symbol,
    pub q: Symbol,
    pub v: Symbol,
    pub v1: Symbol,
}

pub fn mkhz_symbols() -> MkhzSymbols {
    MkhzSymbols {
        t: Symbol::new("t"),
        x: Symbol::new("x"),
        y: Symbol::new("y"),
        u_x: Symbol::new("u_x"),
        u_y: Symbol::new("u_y"),
        u_xx: Symbol::new("u_xx"),
        q: Symbol::new("q"),
        v: family_symbol("v", 0),
        v1: family_symbol("v", 1),
    }
}

/// `xi^1 = q dt`, `xi^2 = u_xx^2/q (dx + u_x dy + (u_x^2/2 + u_y) dt)`,
/// `xi^3 = u_xx (2 u_x dt + dy)`,
/// `eta_1 = 3/u_xx du_xx - 2/q dq - u_xx/2 dy - u_x u_xx dt`.
pub fn mkhz_invariant_forms() -> MkhzForms {
    let s = mkhz_symbols();
    let e = RationalExpr::symbol;
    let half = RationalExpr::ratio(1, 2);
    let (ux, uy, uxx, q) = (e(s.u_x), e(s.u_y), e(s.u_xx), e(s.q));
    let a = &(&half * &ux.pow(2)) + &uy;
    let xi1 = DifferentialForm::one_form([(s.t, q.clone())]);
    let base = DifferentialForm::one_form([(s.x, RationalExpr::one()), (s.y, ux.clone()), (s.t, a)]);
    let xi2 = base.scale(&(uxx.pow(2).checked_div(&q).expect("q is a symbol")));
    let xi3 = DifferentialForm::one_form([
        (s.t, &(&RationalExpr::integer(2) * &ux) * &uxx),
        (s.y, uxx.clone()),
    ]);
    let eta1 = DifferentialForm::one_form([
        (s.u_xx, RationalExpr::integer(3).checked_div(&uxx).expect("u_xx is a symbol")),
        (s.q, RationalExpr::integer(-2).checked_div(&q).expect("q is a symbol")),
        (s.y, -(&half * &uxx)),
        (s.t, -(&ux * &uxx)),
    ]);
    MkhzForms { xi1, xi2, xi3, eta1 }
}

/// The substitution `u_xx = v^2 v1^2`, `q = v^5 v1^3 / 4`.
pub fn mkhz_substitution() -> HashMap<Symbol, RationalExpr> {
    let s = mkhz_symbols();
    let (v, v1) = (RationalExpr::symbol(s.v), RationalExpr::symbol(s.v1));
    HashMap::from([
        (s.u_xx, &v.pow(2) * &v1.pow(2)),
        (s.q, &RationalExpr::ratio(1, 4) * &(&v.pow(5) * &v1.pow(3))),
    ])
}

/// `-4/v (dv - (u_x^2/2 + u_y) v1 dt - v1 dx - u_x v1 dy)`.
pub fn mkhz_expected_form() -> DifferentialForm {
    let s = mkhz_symbols();
    let e = RationalExpr::symbol;
    let v1 = e(s.v1);
    let a = &(&RationalExpr::ratio(1, 2) * &e(s.u_x).pow(2)) + &e(s.u_y);
    let we = DifferentialForm::one_form([
        (s.v, RationalExpr::one()),
        (s.t, -(&a * &v1)),
        (s.x, -v1.clone()),
        (s.y, -(&e(s.u_x) * &v1)),
    ]);
    we.scale(&RationalExpr::integer(-4).checked_div(&e(s.v)).expect("v is a symbol"))
}

#[derive(Clone, Debug)]
pub struct LinearCombination {
    /// `eta_1 + xi^2 + xi^3/2` after the substitution.
    pub substituted: DifferentialForm,
    /// `substituted` minus [`mkhz_expected_form`].
    pub difference: DifferentialForm,
    /// The same difference when `xi^2` is replaced by
    /// `u_xx^2/2 (dx + u_x dy + (u_x^2/2 + u_y) dt)`.
    pub literal_difference: DifferentialForm,
}

impl LinearCombination {
    pub fn holds(&self) -> bool {
        self.difference.is_zero()
    }
}

pub fn mkhz_linear_combination() -> Result<LinearCombination> {
    let forms = mkhz_invariant_forms();
    let rules = mkhz_substitution();
    let half = RationalExpr::ratio(1, 2);
    let combo = &(&forms.eta1 + &forms.xi2) + &forms.xi3.scale(&half);
    let substituted = combo.pullback(&rules)?;
    let expected = mkhz_expected_form();
    let difference = &substituted - &expected;

    let s = mkhz_symbols();
    let ux = RationalExpr::symbol(s.u_x);
    let a = &(&half * &ux.pow(2)) + &RationalExpr::symbol(s.u_y);
    let base = DifferentialForm::one_form([(s.x, RationalExpr::one()), (s.y, ux), (s.t, a)]);
    let literal_xi2 = base.scale(&(&half * &RationalExpr::symbol(s.u_xx).pow(2)));
    let literal = &(&forms.eta1 + &literal_xi2) + &forms.xi3.scale(&half);
    let literal_difference = &literal.pullback(&rules)? - &expected;
    Ok(LinearCombination {
        substituted,
        difference,
        literal_difference,
    })
}

/// The covering read off from a form `c (dv - sum_i T_i dx^i)`: returns
/// `T_t, T_x, T_y`.
pub fn covering_from_form(form: &DifferentialForm) -> Result<Vec<RationalExpr>> {
    let s = mkhz_symbols();
    let c = form.coefficient(&[s.v]);
    if c.is_zero() {
        return Err(Error::Invalid("form has no dv component".into()));
    }
    [s.t, s.x, s.y]
        .iter()
        .map(|x| (-form.coefficient(&[*x])).checked_div(&c))
        .collect()
}

/// The equation `u_yy = u_tx + (u_x^2/2 - u_y) u_xx` over `t, x, y`.
pub fn mkhz_equation(order: usize) -> Result<EquationIdeal> {
    let ctx = JetContext::new(&["t", "x", "y"], &["u"], order)?;
    let j = |s: &str| ctx.jet_by_name("u", s).map(RationalExpr::symbol);
    let rhs = &j("tx")? + &(&(&(&RationalExpr::ratio(1, 2) * &j("x")?.pow(2)) - &j("y")?) * &j("xx")?);
    EquationIdeal::new(ctx.clone(), ctx.jet_by_name("u", "yy")?, rhs)
}

/// The covering emitted by the linear combination, as a family in `x` over
/// the equation, truncated at `order`.
pub fn mkhz_emitted_covering(order: usize) -> Result<Covering> {
    let lc = mkhz_linear_combination()?;
    let seed = covering_from_form(&lc.substituted)?;
    Covering::family(mkhz_equation(order + 5)?, "v", 1, seed, order)
}
