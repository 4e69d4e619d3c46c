//! Exact decision procedure for bounded domains.
//!
//! Variables range over `[-B, B]` (the placeholder over `[-Bc, Bc]`, booleans
//! over `{false, true}`). The body is evaluated over boxes of intervals with
//! Kleene logic; a box on which the body is definitely true or false is
//! decided as a whole, otherwise it is bisected. Point boxes evaluate
//! exactly, so the result equals plain enumeration.

use std::time::Instant;

use crate::frontend::ast::Sort;
use crate::frontend::interp::Value;
use crate::logic::{BinKind, Formula, QuantifiedQuery, UnknownReason, Valuation, Verdict, Var};

use super::onepoint;
use super::{SolverConfig, SolverError};

type Id = u32;

#[derive(Debug, Clone)]
enum Node {
    Int(i128),
    Bool(bool),
    Var(usize),
    Neg(Id),
    Arith(BinKind, Id, Id),
    Cmp(BinKind, Id, Id),
    /// Equality / disequality over booleans.
    BoolEq(bool, Id, Id),
    And(Vec<Id>),
    Or(Vec<Id>),
    Not(Id),
    Implies(Id, Id),
    Ite(Id, Id, Id),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    F,
    T,
    U,
}

impl Tri {
    fn from_bounds(lo: i128, hi: i128) -> Tri {
        match (lo, hi) {
            (1, 1) => Tri::T,
            (0, 0) => Tri::F,
            _ => Tri::U,
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::F => Tri::T,
            Tri::T => Tri::F,
            Tri::U => Tri::U,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum AVal {
    I(i128, i128),
    B(Tri),
}

const TOP: AVal = AVal::I(i128::MIN, i128::MAX);

impl AVal {
    fn int(self) -> (i128, i128) {
        match self {
            AVal::I(l, h) => (l, h),
            AVal::B(_) => unreachable!("sort checked at compile time"),
        }
    }
}

struct Compiled {
    nodes: Vec<Node>,
    root: Id,
}

struct Compiler<'a> {
    vars: &'a [Var],
    nodes: Vec<Node>,
}

impl Compiler<'_> {
    fn push(&mut self, n: Node) -> Id {
        self.nodes.push(n);
        (self.nodes.len() - 1) as Id
    }

    fn go(&mut self, f: &Formula) -> Result<Id, SolverError> {
        use Formula as F;
        let node = match f {
            F::Int(v) => Node::Int(*v as i128),
            F::Bool(b) => Node::Bool(*b),
            F::Var(v) => {
                let i = self
                    .vars
                    .iter()
                    .position(|w| w.name == v.name)
                    .ok_or_else(|| SolverError::Unsupported(format!("free variable {}", v.name)))?;
                Node::Var(i)
            }
            F::Neg(a) => Node::Neg(self.go(a)?),
            F::Not(a) => Node::Not(self.go(a)?),
            F::And(v) => Node::And(v.iter().map(|p| self.go(p)).collect::<Result<_, _>>()?),
            F::Or(v) => Node::Or(v.iter().map(|p| self.go(p)).collect::<Result<_, _>>()?),
            F::Ite(c, t, e) => Node::Ite(self.go(c)?, self.go(t)?, self.go(e)?),
            F::Forall(..) | F::Exists(..) => {
                return Err(SolverError::Unsupported("nested quantifier".into()))
            }
            other => {
                let (k, a, b) = other.as_binary().expect("binary node");
                let bool_operands = a.sort() == Sort::Bool;
                let (a, b) = (self.go(a)?, self.go(b)?);
                match k {
                    BinKind::Add | BinKind::Sub | BinKind::Mul => Node::Arith(k, a, b),
                    BinKind::Implies => Node::Implies(a, b),
                    BinKind::Eq if bool_operands => Node::BoolEq(true, a, b),
                    BinKind::Ne if bool_operands => Node::BoolEq(false, a, b),
                    _ => Node::Cmp(k, a, b),
                }
            }
        };
        Ok(self.push(node))
    }
}

impl Compiled {
    fn new(body: &Formula, vars: &[Var]) -> Result<Self, SolverError> {
        let mut c = Compiler {
            vars,
            nodes: Vec::new(),
        };
        let root = c.go(body)?;
        Ok(Compiled {
            nodes: c.nodes,
            root,
        })
    }

    fn eval(&self, bx: &[(i128, i128)]) -> Tri {
        self.node(self.root, bx).bool3()
    }

    fn node(&self, id: Id, bx: &[(i128, i128)]) -> AVal {
        match &self.nodes[id as usize] {
            Node::Int(v) => AVal::I(*v, *v),
            Node::Bool(b) => AVal::B(if *b { Tri::T } else { Tri::F }),
            Node::Var(i) => AVal::I(bx[*i].0, bx[*i].1),
            Node::Neg(a) => {
                let (l, h) = self.node(*a, bx).int();
                match (h.checked_neg(), l.checked_neg()) {
                    (Some(nl), Some(nh)) => AVal::I(nl, nh),
                    _ => TOP,
                }
            }
            Node::Arith(k, a, b) => {
                let (al, ah) = self.node(*a, bx).int();
                let (bl, bh) = self.node(*b, bx).int();
                let r = match k {
                    BinKind::Add => al.checked_add(bl).zip(ah.checked_add(bh)),
                    BinKind::Sub => al.checked_sub(bh).zip(ah.checked_sub(bl)),
                    _ => {
                        let ps = [
                            al.checked_mul(bl),
                            al.checked_mul(bh),
                            ah.checked_mul(bl),
                            ah.checked_mul(bh),
                        ];
                        if ps.iter().any(Option::is_none) {
                            None
                        } else {
                            let ps = ps.map(Option::unwrap);
                            Some((*ps.iter().min().unwrap(), *ps.iter().max().unwrap()))
                        }
                    }
                };
                match r {
                    Some((l, h)) if l != i128::MIN && h != i128::MAX => AVal::I(l, h),
                    _ => TOP,
                }
            }
            Node::Cmp(k, a, b) => {
                let (al, ah) = self.node(*a, bx).int();
                let (bl, bh) = self.node(*b, bx).int();
                let top = |l: i128, h: i128| l == i128::MIN && h == i128::MAX;
                if top(al, ah) || top(bl, bh) {
                    return AVal::B(Tri::U);
                }
                let t = match k {
                    BinKind::Lt => cmp_lt(al, ah, bl, bh),
                    BinKind::Le => cmp_lt(al, ah, bl + 1, bh + 1),
                    BinKind::Gt => cmp_lt(bl, bh, al, ah),
                    BinKind::Ge => cmp_lt(bl, bh, al + 1, ah + 1),
                    BinKind::Eq => cmp_eq(al, ah, bl, bh),
                    BinKind::Ne => cmp_eq(al, ah, bl, bh).not(),
                    _ => unreachable!(),
                };
                AVal::B(t)
            }
            Node::BoolEq(pos, a, b) => {
                let (x, y) = (self.node(*a, bx).bool3(), self.node(*b, bx).bool3());
                let eq = match (x, y) {
                    (Tri::U, _) | (_, Tri::U) => Tri::U,
                    _ => {
                        if x == y {
                            Tri::T
                        } else {
                            Tri::F
                        }
                    }
                };
                AVal::B(if *pos { eq } else { eq.not() })
            }
            Node::And(ps) => {
                let mut acc = Tri::T;
                for p in ps {
                    match self.node(*p, bx).bool3() {
                        Tri::F => return AVal::B(Tri::F),
                        Tri::U => acc = Tri::U,
                        Tri::T => {}
                    }
                }
                AVal::B(acc)
            }
            Node::Or(ps) => {
                let mut acc = Tri::F;
                for p in ps {
                    match self.node(*p, bx).bool3() {
                        Tri::T => return AVal::B(Tri::T),
                        Tri::U => acc = Tri::U,
                        Tri::F => {}
                    }
                }
                AVal::B(acc)
            }
            Node::Not(a) => AVal::B(self.node(*a, bx).bool3().not()),
            Node::Implies(a, b) => match self.node(*a, bx).bool3() {
                Tri::F => AVal::B(Tri::T),
                Tri::T => AVal::B(self.node(*b, bx).bool3()),
                Tri::U => match self.node(*b, bx).bool3() {
                    Tri::T => AVal::B(Tri::T),
                    _ => AVal::B(Tri::U),
                },
            },
            Node::Ite(c, t, e) => match self.node(*c, bx).bool3() {
                Tri::T => self.node(*t, bx),
                Tri::F => self.node(*e, bx),
                Tri::U => match (self.node(*t, bx), self.node(*e, bx)) {
                    (AVal::I(a, b), AVal::I(c, d)) => AVal::I(a.min(c), b.max(d)),
                    (x, y) => {
                        let (x, y) = (x.bool3(), y.bool3());
                        AVal::B(if x == y { x } else { Tri::U })
                    }
                },
            },
        }
    }
}

impl AVal {
    /// Boolean variables are stored as 0/1 intervals.
    fn bool3(self) -> Tri {
        match self {
            AVal::B(t) => t,
            AVal::I(l, h) => Tri::from_bounds(l, h),
        }
    }
}

fn cmp_lt(al: i128, ah: i128, bl: i128, bh: i128) -> Tri {
    if ah < bl {
        Tri::T
    } else if al >= bh {
        Tri::F
    } else {
        Tri::U
    }
}

fn cmp_eq(al: i128, ah: i128, bl: i128, bh: i128) -> Tri {
    if al == ah && bl == bh && al == bl {
        Tri::T
    } else if ah < bl || bh < al {
        Tri::F
    } else {
        Tri::U
    }
}

/// Search outcome inside one subtree.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Out {
    Holds,
    Fails(Vec<(i128, i128)>),
    Unknown(UnknownReason),
}

struct Search {
    code: Compiled,
    /// Indices into the box: inputs, then placeholder, then auxiliaries.
    inputs: Vec<usize>,
    placeholder: Option<usize>,
    aux: Vec<usize>,
    deadline: Instant,
    steps: u64,
    placeholder_bool: bool,
    /// Placeholder values that settled earlier boxes, most recent first.
    learned: Vec<i128>,
}

const LEARNED_MAX: usize = 4;

const CHECK_EVERY: u64 = 1024;

impl Search {
    fn tick(&mut self) -> Result<(), UnknownReason> {
        self.steps += 1;
        if self.steps.is_multiple_of(CHECK_EVERY) && Instant::now() >= self.deadline {
            return Err(UnknownReason::Timeout);
        }
        Ok(())
    }

    /// Split the first widest non-point variable among `idx`.
    fn split(bx: &[(i128, i128)], idx: &[usize]) -> Option<(usize, i128)> {
        let mut best: Option<(usize, i128)> = None;
        for &i in idx {
            let (l, h) = bx[i];
            if l < h && best.is_none_or(|(_, w)| h - l > w) {
                best = Some((i, h - l));
            }
        }
        best.map(|(i, _)| {
            let (l, h) = bx[i];
            (i, l + (h - l).div_euclid(2))
        })
    }

    /// Halves of `bx` at variable `i`, the one nearer zero first.
    fn halves(bx: &[(i128, i128)], i: usize, mid: i128) -> [Vec<(i128, i128)>; 2] {
        let (l, h) = bx[i];
        let mut lo = bx.to_vec();
        lo[i] = (l, mid);
        let mut hi = bx.to_vec();
        hi[i] = (mid + 1, h);
        if mid < 0 {
            [hi, lo]
        } else {
            [lo, hi]
        }
    }

    /// `forall vars in idx. rest`, where `rest` is decided by `inner` once
    /// the variables of `idx` are points.
    fn forall(
        &mut self,
        bx: Vec<(i128, i128)>,
        idx: &[usize],
        inner: &mut dyn FnMut(&mut Self, &[(i128, i128)]) -> Result<Out, UnknownReason>,
    ) -> Result<Out, UnknownReason> {
        self.tick()?;
        match self.code.eval(&bx) {
            Tri::T => return Ok(Out::Holds),
            Tri::F => return Ok(Out::Fails(bx)),
            Tri::U => {}
        }
        let Some((i, mid)) = Self::split(&bx, idx) else {
            return inner(self, &bx);
        };
        let mut unknown = None;
        for half in Self::halves(&bx, i, mid) {
            match self.forall(half, idx, inner)? {
                Out::Holds => {}
                f @ Out::Fails(_) => return Ok(f),
                Out::Unknown(r) => unknown = unknown.or(Some(r)),
            }
        }
        Ok(unknown.map_or(Out::Holds, Out::Unknown))
    }

    /// `forall aux. body` at a box where everything else is a point.
    fn forall_aux(&mut self, bx: &[(i128, i128)]) -> Result<Out, UnknownReason> {
        let aux = self.aux.clone();
        self.forall(bx.to_vec(), &aux, &mut |_, _| {
            // Every variable is a point and the value is still unknown:
            // some intermediate result left the machine range.
            Ok(Out::Unknown(UnknownReason::Resource))
        })
    }

    /// `exists c in bx[c]. forall aux. body`.
    fn exists_c(&mut self, bx: Vec<(i128, i128)>, c: usize) -> Result<Out, UnknownReason> {
        self.tick()?;
        match self.code.eval(&bx) {
            Tri::T => {
                self.learn(near_zero(bx[c]));
                return Ok(Out::Holds);
            }
            Tri::F => return Ok(Out::Fails(bx)),
            Tri::U => {}
        }
        let (l, h) = bx[c];
        if l == h {
            let out = self.forall_aux(&bx)?;
            if out == Out::Holds {
                self.learn(l);
            }
            return Ok(out);
        }
        let mid = l + (h - l).div_euclid(2);
        let mut unknown = None;
        let mut failed = None;
        for half in Self::halves(&bx, c, mid) {
            match self.exists_c(half, c)? {
                Out::Holds => return Ok(Out::Holds),
                Out::Fails(b) => failed = failed.or(Some(b)),
                Out::Unknown(r) => unknown = unknown.or(Some(r)),
            }
        }
        Ok(match unknown {
            Some(r) => Out::Unknown(r),
            None => Out::Fails(failed.expect("two halves")),
        })
    }

    /// Whether one of the quick placeholder values settles the whole box.
    fn quick_holds(&mut self, bx: &[(i128, i128)], c: usize) -> bool {
        let quick: &[i128] = if self.placeholder_bool { &[0, 1] } else { &[0, 1, -1] };
        let (l, h) = bx[c];
        let mut p = bx.to_vec();
        let tries = self.learned.iter().chain(quick.iter().filter(|v| !self.learned.contains(v)));
        let hit = tries.copied().filter(|&v| l <= v && v <= h).find(|&v| {
            p[c] = (v, v);
            self.code.eval(&p) == Tri::T
        });
        if let Some(v) = hit {
            self.learn(v);
        }
        hit.is_some()
    }

    fn learn(&mut self, v: i128) {
        self.learned.retain(|&x| x != v);
        self.learned.insert(0, v);
        self.learned.truncate(LEARNED_MAX);
    }

    /// `forall inputs. exists c. forall aux. body`, trying the quick
    /// placeholder values on every input box before splitting it.
    fn forall_inputs(&mut self, bx: Vec<(i128, i128)>, c: usize) -> Result<Out, UnknownReason> {
        self.tick()?;
        match self.code.eval(&bx) {
            Tri::T => return Ok(Out::Holds),
            Tri::F => return Ok(Out::Fails(bx)),
            Tri::U => {}
        }
        if self.quick_holds(&bx, c) {
            return Ok(Out::Holds);
        }
        let Some((i, mid)) = Self::split(&bx, &self.inputs) else {
            return self.at_point(bx);
        };
        let mut unknown = None;
        for half in Self::halves(&bx, i, mid) {
            match self.forall_inputs(half, c)? {
                Out::Holds => {}
                f @ Out::Fails(_) => return Ok(f),
                Out::Unknown(r) => unknown = unknown.or(Some(r)),
            }
        }
        Ok(unknown.map_or(Out::Holds, Out::Unknown))
    }

    /// Decide the part below the inputs at a single input point.
    fn at_point(&mut self, bx: Vec<(i128, i128)>) -> Result<Out, UnknownReason> {
        match self.placeholder {
            None => {
                let aux = self.aux.clone();
                self.forall(bx, &aux, &mut |s, b| s.forall_aux(b))
            }
            Some(c) => match self.exists_c(bx.clone(), c)? {
                Out::Fails(_) => Ok(Out::Fails(bx)),
                other => Ok(other),
            },
        }
    }

    fn run(&mut self, bx: Vec<(i128, i128)>, hints: &[Vec<(i128, i128)>]) -> Result<Out, UnknownReason> {
        for h in hints {
            if let f @ Out::Fails(_) = self.at_point(h.clone())? {
                return Ok(f);
            }
        }
        match self.placeholder {
            None => {
                let mut all = self.inputs.clone();
                all.extend(self.aux.iter().copied());
                self.forall(bx, &all, &mut |s, b| s.forall_aux(b))
            }
            Some(c) => self.forall_inputs(bx, c),
        }
    }
}

fn domain(v: &Var, bound: i64) -> (i128, i128) {
    match v.sort {
        Sort::Bool => (0, 1),
        Sort::Int => (-(bound as i128), bound as i128),
    }
}

/// The point of an interval nearest to zero.
fn near_zero((l, h): (i128, i128)) -> i128 {
    0.clamp(l, h)
}

fn to_value(v: &Var, x: i128) -> Value {
    match v.sort {
        Sort::Bool => Value::Bool(x != 0),
        Sort::Int => Value::Int(x as i64),
    }
}

/// Decide `q` over the bounded domains of `cfg`. Input points in `hints`
/// are checked before the exhaustive search; inputs a hint leaves out are 0.
pub fn decide(q: &QuantifiedQuery, cfg: &SolverConfig, hints: &[Valuation]) -> Result<Verdict, SolverError> {
    let q = &onepoint::eliminate(q, cfg.bound);
    let vars: Vec<Var> = q.all_vars().cloned().collect();
    let code = Compiled::new(&q.body, &vars)?;
    let n_in = q.inputs.len();
    let placeholder = q.placeholder.as_ref().map(|_| n_in);
    let aux_start = n_in + usize::from(placeholder.is_some());
    let mut bx: Vec<(i128, i128)> = Vec::with_capacity(vars.len());
    bx.extend(q.inputs.iter().map(|v| domain(v, cfg.bound)));
    if let Some(c) = &q.placeholder {
        bx.push(domain(c, cfg.placeholder_bound));
    }
    bx.extend(q.auxiliaries.iter().map(|v| domain(v, cfg.bound)));

    let mut s = Search {
        code,
        inputs: (0..n_in).collect(),
        placeholder,
        aux: (aux_start..vars.len()).collect(),
        deadline: Instant::now() + cfg.timeout,
        steps: 0,
        placeholder_bool: q.placeholder.as_ref().is_some_and(|c| c.sort == Sort::Bool),
        learned: Vec::new(),
    };
    let points: Vec<Vec<(i128, i128)>> = hints
        .iter()
        .filter_map(|h| {
            let mut p = bx.clone();
            for (i, v) in q.inputs.iter().enumerate() {
                let x = match h.get(&v.name) {
                    Some(Value::Int(n)) => *n as i128,
                    Some(Value::Bool(b)) => i128::from(*b),
                    None => 0,
                };
                let (l, h) = p[i];
                if x < l || x > h {
                    return None;
                }
                p[i] = (x, x);
            }
            Some(p)
        })
        .collect();
    let out = match s.run(bx, &points) {
        Ok(o) => o,
        Err(r) => return Ok(Verdict::Unknown(r)),
    };
    Ok(match out {
        Out::Holds => Verdict::Valid,
        Out::Unknown(r) => Verdict::Unknown(r),
        Out::Fails(b) => {
            // Outermost universal block: the inputs, plus the auxiliaries
            // when there is no placeholder separating them.
            let mut witness = Valuation::new();
            let upto = if placeholder.is_some() { n_in } else { vars.len() };
            for (i, v) in vars.iter().enumerate().take(upto) {
                if Some(i) == placeholder {
                    continue;
                }
                witness.insert(v.name.clone(), to_value(v, near_zero(b[i])));
            }
            Verdict::Invalid {
                witness: Some(witness),
            }
        }
    })
}
