//! Finite Kripke models with fuzzy accessibility and exact evaluation.
//!
//! A [`StandardModel`] evaluates `[]` and `<>` as the exact infimum and
//! supremum over all worlds. An [`FModel`] additionally carries a finite
//! set `T(w)` per world; modal values are rounded down (for `[]`) or up
//! (for `<>`) into that set.

mod json;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::rational::{complement, format_rational, half, in_unit_interval, one, zero, Rational};

pub use json::{load_model, model_from_json, model_to_json, save_model, LoadedModel, SchemaError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("value {0} is outside [0,1]")]
    OutOfRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("illegal F-model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    IllegalModel(Vec<Violation>),
    #[error("T({0}) has no admissible value for a modal formula")]
    NoAdmissibleValue(String),
}

/// A failed legality condition of an F-model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// One of `0`, `1/2`, `1` is missing from `T(world)`.
    MissingAnchor {
        world: String,
        value: Rational,
    },
    /// `x` is in `T(world)` but `1 - x` is not.
    NotClosed {
        world: String,
        value: Rational,
    },
    OutOfRange {
        world: String,
        value: Rational,
    },
    /// The crisp flag is set but an accessibility value is not 0 or 1.
    NotCrisp {
        from: String,
        to: String,
        value: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingAnchor { world, value } => {
                write!(f, "{} ∉ T({world})", format_rational(value))
            }
            Violation::NotClosed { world, value } => write!(
                f,
                "{} ∉ T({world}) although {} ∈ T({world})",
                format_rational(&complement(value)),
                format_rational(value)
            ),
            Violation::OutOfRange { world, value } => {
                write!(f, "{} ∈ T({world}) is outside [0,1]", format_rational(value))
            }
            Violation::NotCrisp { from, to, value } => {
                write!(f, "crisp model has {from}R{to} = {}", format_rational(value))
            }
        }
    }
}

/// A finite Kripke model `<W, R, v>`. Absent accessibility and valuation
/// entries are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardModel {
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    access: Vec<Vec<Rational>>,
    valuation: BTreeMap<String, Vec<Rational>>,
    crisp: bool,
}

impl StandardModel {
    pub fn new<S: Into<String>>(worlds: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        let worlds: Vec<String> = worlds.into_iter().map(Into::into).collect();
        if worlds.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        let mut index = HashMap::new();
        for (i, w) in worlds.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let n = worlds.len();
        Ok(StandardModel {
            worlds,
            index,
            access: vec![vec![zero(); n]; n],
            valuation: BTreeMap::new(),
            crisp: false,
        })
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn require(&self, name: &str) -> Result<usize, ModelError> {
        self.world_index(name)
            .ok_or_else(|| ModelError::UnknownWorld(name.to_string()))
    }

    pub fn set_access(&mut self, from: &str, to: &str, value: Rational) -> Result<(), ModelError> {
        let (i, j) = (self.require(from)?, self.require(to)?);
        if !in_unit_interval(&value) {
            return Err(ModelError::OutOfRange(format_rational(&value)));
        }
        self.access[i][j] = value;
        Ok(())
    }

    pub fn set_value(&mut self, atom: &str, world: &str, value: Rational) -> Result<(), ModelError> {
        let i = self.require(world)?;
        if !in_unit_interval(&value) {
            return Err(ModelError::OutOfRange(format_rational(&value)));
        }
        let n = self.worlds.len();
        self.valuation
            .entry(atom.to_string())
            .or_insert_with(|| vec![zero(); n])[i] = value;
        Ok(())
    }

    pub fn access(&self, from: usize, to: usize) -> &Rational {
        &self.access[from][to]
    }

    pub fn value(&self, atom: &str, world: usize) -> Rational {
        self.valuation.get(atom).map(|v| v[world].clone()).unwrap_or_else(zero)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.valuation.keys().map(String::as_str)
    }

    pub fn is_crisp(&self) -> bool {
        self.crisp
    }

    pub fn set_crisp(&mut self, crisp: bool) {
        self.crisp = crisp;
    }

    /// True when every accessibility value is 0 or 1, regardless of the flag.
    pub fn has_crisp_frame(&self) -> bool {
        self.access.iter().flatten().all(|r| *r == zero() || *r == one())
    }

    /// Nonzero accessibility entries as `(from, to, value)` in world order.
    pub fn edges(&self) -> Vec<(usize, usize, &Rational)> {
        let mut out = Vec::new();
        for (i, row) in self.access.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                if *r != zero() {
                    out.push((i, j, r));
                }
            }
        }
        out
    }

    pub fn eval(&self, world: &str, f: &Formula) -> Result<Rational, EvalError> {
        let i = self
            .world_index(world)
            .ok_or_else(|| EvalError::UnknownWorld(world.to_string()))?;
        Ok(self.eval_all(f, None)?.swap_remove(i))
    }

    /// Values of `f` at every world, in world order.
    pub fn eval_everywhere(&self, f: &Formula) -> Vec<Rational> {
        self.eval_all(f, None).expect("standard evaluation cannot fail")
    }

    fn eval_all(&self, f: &Formula, t: Option<&[BTreeSet<Rational>]>) -> Result<Vec<Rational>, EvalError> {
        let n = self.worlds.len();
        let map = |v: Vec<Rational>, op: &dyn Fn(&Rational) -> Rational| v.iter().map(op).collect();
        let zip = |a: Vec<Rational>, b: Vec<Rational>, op: &dyn Fn(&Rational, &Rational) -> Rational| {
            a.iter().zip(b.iter()).map(|(x, y)| op(x, y)).collect()
        };
        Ok(match f {
            Formula::Atom(name) => (0..n).map(|i| self.value(name, i)).collect(),
            Formula::Top => vec![one(); n],
            Formula::Bottom => vec![zero(); n],
            Formula::Inv(a) => map(self.eval_all(a, t)?, &complement),
            Formula::Neg(a) => map(self.eval_all(a, t)?, &|x| if *x == zero() { one() } else { zero() }),
            Formula::Delta(a) => map(self.eval_all(a, t)?, &|x| if *x == one() { one() } else { zero() }),
            Formula::And(a, b) => zip(self.eval_all(a, t)?, self.eval_all(b, t)?, &godel_and),
            Formula::Or(a, b) => zip(self.eval_all(a, t)?, self.eval_all(b, t)?, &|x, y| x.max(y).clone()),
            Formula::Imp(a, b) => zip(self.eval_all(a, t)?, self.eval_all(b, t)?, &godel_imp),
            Formula::Coimp(a, b) => zip(self.eval_all(a, t)?, self.eval_all(b, t)?, &godel_coimp),
            Formula::Iff(a, b) => zip(self.eval_all(a, t)?, self.eval_all(b, t)?, &|x, y| {
                if x == y {
                    one()
                } else {
                    x.min(y).clone()
                }
            }),
            Formula::Box(a) => {
                let inner = self.eval_all(a, t)?;
                let mut out = Vec::with_capacity(n);
                for w in 0..n {
                    let inf = (0..n)
                        .map(|u| godel_imp(&self.access[w][u], &inner[u]))
                        .min()
                        .unwrap_or_else(one);
                    out.push(match t {
                        None => inf,
                        Some(t) => t[w]
                            .range(..=inf)
                            .next_back()
                            .cloned()
                            .ok_or_else(|| EvalError::NoAdmissibleValue(self.worlds[w].clone()))?,
                    });
                }
                out
            }
            Formula::Dia(a) => {
                let inner = self.eval_all(a, t)?;
                let mut out = Vec::with_capacity(n);
                for w in 0..n {
                    let sup = (0..n)
                        .map(|u| godel_and(&self.access[w][u], &inner[u]))
                        .max()
                        .unwrap_or_else(zero);
                    out.push(match t {
                        None => sup,
                        Some(t) => t[w]
                            .range(sup..)
                            .next()
                            .cloned()
                            .ok_or_else(|| EvalError::NoAdmissibleValue(self.worlds[w].clone()))?,
                    });
                }
                out
            }
        })
    }
}

pub fn godel_and(a: &Rational, b: &Rational) -> Rational {
    a.min(b).clone()
}

pub fn godel_imp(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        one()
    } else {
        b.clone()
    }
}

pub fn godel_coimp(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        zero()
    } else {
        a.clone()
    }
}

/// A finite F-model: a standard model plus a finite value set `T(w)` per
/// world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FModel {
    frame: StandardModel,
    t: Vec<BTreeSet<Rational>>,
}

impl FModel {
    /// Wraps a standard model with `T(w) = {0, 1/2, 1}` everywhere.
    pub fn from_standard(frame: StandardModel) -> Self {
        let anchors: BTreeSet<Rational> = [zero(), half(), one()].into_iter().collect();
        let t = vec![anchors; frame.worlds.len()];
        FModel { frame, t }
    }

    pub fn frame(&self) -> &StandardModel {
        &self.frame
    }

    pub fn frame_mut(&mut self) -> &mut StandardModel {
        &mut self.frame
    }

    pub fn worlds(&self) -> &[String] {
        self.frame.worlds()
    }

    pub fn t_set(&self, world: usize) -> &BTreeSet<Rational> {
        &self.t[world]
    }

    /// Replaces `T(world)` verbatim; legality is checked by [`FModel::validate`].
    pub fn set_t(&mut self, world: &str, values: impl IntoIterator<Item = Rational>) -> Result<(), ModelError> {
        let i = self.frame.require(world)?;
        self.t[i] = values.into_iter().collect();
        Ok(())
    }

    /// Lists every violated legality condition: `{0, 1/2, 1} ⊆ T(w)`,
    /// closure of `T(w)` under `1 - x`, values in `[0,1]`, and the crisp
    /// flag.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, set) in self.t.iter().enumerate() {
            let world = &self.frame.worlds[i];
            for anchor in [zero(), half(), one()] {
                if !set.contains(&anchor) {
                    out.push(Violation::MissingAnchor {
                        world: world.clone(),
                        value: anchor,
                    });
                }
            }
            for x in set {
                if !in_unit_interval(x) {
                    out.push(Violation::OutOfRange {
                        world: world.clone(),
                        value: x.clone(),
                    });
                } else if !set.contains(&complement(x)) {
                    out.push(Violation::NotClosed {
                        world: world.clone(),
                        value: x.clone(),
                    });
                }
            }
        }
        if self.frame.crisp {
            for (i, j, r) in self.frame.edges() {
                if *r != one() {
                    out.push(Violation::NotCrisp {
                        from: self.frame.worlds[i].clone(),
                        to: self.frame.worlds[j].clone(),
                        value: r.clone(),
                    });
                }
            }
        }
        out
    }

    /// F-model evaluation; rejects illegal models.
    pub fn eval(&self, world: &str, f: &Formula) -> Result<Rational, EvalError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(EvalError::IllegalModel(violations));
        }
        self.eval_unchecked(world, f)
    }

    /// F-model evaluation without the legality check. Only meant for
    /// inspecting deliberately illegal models.
    pub fn eval_unchecked(&self, world: &str, f: &Formula) -> Result<Rational, EvalError> {
        let i = self
            .frame
            .world_index(world)
            .ok_or_else(|| EvalError::UnknownWorld(world.to_string()))?;
        Ok(self.frame.eval_all(f, Some(&self.t))?.swap_remove(i))
    }

    /// Values of `f` at every world, without the legality check.
    pub fn eval_everywhere(&self, f: &Formula) -> Result<Vec<Rational>, EvalError> {
        self.frame.eval_all(f, Some(&self.t))
    }
}

/// Turns a standard model into an F-model that agrees with it on `f`.
///
/// `T(w)` collects the exact values of the modal subformulas of `f` at `w`,
/// closed under `1 - x` and joined with `{0, 1/2, 1}`. Rounding into `T(w)`
/// is then the identity on every modal subformula.
pub fn lift_standard(model: &StandardModel, f: &Formula) -> FModel {
    let mut lifted = FModel::from_standard(model.clone());
    for sub in f.subformulas() {
        if matches!(sub, Formula::Box(_) | Formula::Dia(_)) {
            for (w, x) in model.eval_everywhere(&sub).into_iter().enumerate() {
                lifted.t[w].insert(complement(&x));
                lifted.t[w].insert(x);
            }
        }
    }
    lifted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::rational::ratio;

    /// w -2/3-> w' (p = 1/5), w -2/3-> w'' (p = 1/4), p = 0 at w.
    pub(crate) fn non_interdefinability_model() -> StandardModel {
        let mut m = StandardModel::new(["w", "w'", "w''"]).unwrap();
        m.set_access("w", "w'", ratio(2, 3)).unwrap();
        m.set_access("w", "w''", ratio(2, 3)).unwrap();
        m.set_value("p", "w'", ratio(1, 5)).unwrap();
        m.set_value("p", "w''", ratio(1, 4)).unwrap();
        m
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn box_and_diamond_on_two_successors() {
        let m = non_interdefinability_model();
        assert_eq!(m.eval("w", &f("[]p")).unwrap(), ratio(1, 5));
        assert_eq!(m.eval("w", &f("<>p")).unwrap(), ratio(1, 4));
    }

    #[test]
    fn empty_successor_sets() {
        let m = non_interdefinability_model();
        assert_eq!(m.eval("w'", &f("[]p")).unwrap(), one());
        assert_eq!(m.eval("w'", &f("<>p")).unwrap(), zero());
    }

    #[test]
    fn double_involution_and_implication() {
        let mut m = StandardModel::new(["w"]).unwrap();
        m.set_value("p", "w", ratio(7, 10)).unwrap();
        m.set_value("q", "w", ratio(3, 10)).unwrap();
        assert_eq!(m.eval("w", &f("~~p")).unwrap(), ratio(7, 10));
        assert_eq!(m.eval("w", &f("p -> q")).unwrap(), ratio(3, 10));
        assert_eq!(m.eval("w", &f("q -> p")).unwrap(), one());
        assert_eq!(m.eval("w", &f("p -< q")).unwrap(), ratio(7, 10));
        assert_eq!(m.eval("w", &f("p <-> q")).unwrap(), ratio(3, 10));
        assert_eq!(m.eval("w", &f("#p | !q")).unwrap(), zero());
    }

    #[test]
    fn unknown_world_is_an_error() {
        let m = non_interdefinability_model();
        assert_eq!(m.eval("v", &f("p")), Err(EvalError::UnknownWorld("v".into())));
    }

    fn open_branch_countermodel() -> FModel {
        let mut m = StandardModel::new(["w", "w'"]).unwrap();
        m.set_access("w", "w'", half()).unwrap();
        m.set_value("p", "w'", half()).unwrap();
        FModel::from_standard(m)
    }

    #[test]
    fn f_model_rounds_modal_values() {
        let m = open_branch_countermodel();
        assert!(m.validate().is_empty());
        assert_eq!(m.eval("w", &f("[]p")).unwrap(), one());
        assert_eq!(m.eval("w", &f("~<>~p")).unwrap(), half());
        assert_eq!(m.eval("w", &f("[]p -> ~<>~p")).unwrap(), half());
    }

    #[test]
    fn illegal_models_need_the_override() {
        // w0 -1/2-> w1 with p = 1/2 and T(w0) = {0, 1}
        let mut frame = StandardModel::new(["w0", "w1"]).unwrap();
        frame.set_access("w0", "w1", half()).unwrap();
        frame.set_value("p", "w1", half()).unwrap();
        let mut m = FModel::from_standard(frame);
        m.set_t("w0", [zero(), one()]).unwrap();
        let violations = m.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].to_string(), "1/2 ∉ T(w0)");
        assert!(matches!(
            m.eval("w0", &f("[]p & <>~p")),
            Err(EvalError::IllegalModel(_))
        ));
        assert_eq!(m.eval_unchecked("w0", &f("[]p & <>~p")).unwrap(), one());

        // crisp w0' -1-> w1' with p = 1/3 and T(w0') = {0, 1/3, 1/2, 1}
        let mut frame = StandardModel::new(["w0'", "w1'"]).unwrap();
        frame.set_access("w0'", "w1'", one()).unwrap();
        frame.set_value("p", "w1'", ratio(1, 3)).unwrap();
        frame.set_crisp(true);
        let mut m = FModel::from_standard(frame);
        m.set_t("w0'", [zero(), ratio(1, 3), half(), one()]).unwrap();
        assert!(!m.validate().is_empty());
        assert_eq!(m.eval_unchecked("w0'", &f("[]p <-> ~<>~p")).unwrap(), zero());
    }

    #[test]
    fn closure_failure_is_reported() {
        let mut m = open_branch_countermodel();
        m.set_t("w", [zero(), ratio(1, 4), half(), one()]).unwrap();
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("3/4 ∉ T(w)"));
    }

    #[test]
    fn crisp_flag_is_checked() {
        let mut m = open_branch_countermodel();
        m.frame_mut().set_crisp(true);
        assert!(matches!(m.validate()[0], Violation::NotCrisp { .. }));
    }

    #[test]
    fn lifting_keeps_modal_values() {
        let m = non_interdefinability_model();
        let boxed = lift_standard(&m, &f("[]p"));
        for x in [zero(), ratio(1, 5), half(), ratio(4, 5), one()] {
            assert!(boxed.t_set(0).contains(&x));
        }
        assert_eq!(boxed.eval("w", &f("[]p")).unwrap(), ratio(1, 5));

        let dia = lift_standard(&m, &f("<>p"));
        assert!(dia.t_set(0).contains(&ratio(1, 4)));
        assert!(dia.t_set(0).contains(&ratio(3, 4)));
        assert_eq!(dia.eval("w", &f("<>p")).unwrap(), ratio(1, 4));

        let plain = lift_standard(&m, &f("p -> ~p"));
        assert_eq!(plain.t_set(0).len(), 3);
        assert_eq!(
            plain.eval("w'", &f("p -> ~p")).unwrap(),
            m.eval("w'", &f("p -> ~p")).unwrap()
        );
    }
}
