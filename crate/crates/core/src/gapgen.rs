//! Planted YES/NO instances built from the hidden-partition communication
//! problem.
//!
//! A hidden partition `X*` of the variables is drawn uniformly. Each of `T`
//! messages is a sparse random graph `G(n, 2β/n)` whose edges carry a mark
//! bit: in the YES case the bit says the edge crosses `X*`, in the NO case
//! that it does not. The reductions turn marked edges into clause pairs and
//! add planted unit or AND clauses that agree with `X*`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use thiserror::Error;

use crate::assignment::Assignment;
use crate::formula::{Clause, ClauseKind, Formula, Literal};

#[derive(Debug, Error, PartialEq)]
pub enum GapError {
    #[error("edge probability 2β/n = {0} exceeds 1")]
    EdgeProbability(f64),
    #[error("need at least two variables, got {0}")]
    TooFewVariables(u32),
    #[error("beta must be positive and finite, got {0}")]
    BadBeta(f64),
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("default message count {0:e} does not fit a 64-bit integer")]
    TooManyMessages(f64),
    #[error("planted side is empty or covers every variable")]
    DegeneratePartition,
    #[error("clause {0} is not an XOR of two literals")]
    NotXor(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbhpParams {
    pub n: u32,
    pub beta: f64,
    pub t: u64,
    pub epsilon: f64,
    pub seed: u64,
}

impl DbhpParams {
    /// `T = (10000/ε²)³ (10c)²` and `β = (10cT)^{-2/3}` with `c = 1`,
    /// so that `βT = 10000/ε²`.
    pub fn with_paper_defaults(n: u32, epsilon: f64, seed: u64) -> Result<Self, GapError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(GapError::BadEpsilon(epsilon));
        }
        let c: f64 = 1.0;
        let t = (10_000.0 / (epsilon * epsilon)).powi(3) * (10.0 * c).powi(2);
        if t >= u64::MAX as f64 {
            return Err(GapError::TooManyMessages(t));
        }
        let beta = (10.0 * c * t).powf(-2.0 / 3.0);
        Ok(DbhpParams {
            n,
            beta,
            t: t as u64,
            epsilon,
            seed,
        })
    }

    pub fn edge_probability(&self) -> f64 {
        2.0 * self.beta / f64::from(self.n)
    }

    /// `βnT`, the scale every clause count is measured in.
    pub fn budget(&self) -> f64 {
        self.beta * f64::from(self.n) * self.t as f64
    }

    fn validate(&self) -> Result<(), GapError> {
        if self.n < 2 {
            return Err(GapError::TooFewVariables(self.n));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(GapError::BadBeta(self.beta));
        }
        let p = self.edge_probability();
        if p > 1.0 {
            return Err(GapError::EdgeProbability(p));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Yes,
    No,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Yes => "YES",
            Case::No => "NO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Eand,
    Or,
    XorToOr,
}

impl Reduction {
    pub fn name(self) -> &'static str {
        match self {
            Reduction::Eand => "eand",
            Reduction::Or => "or",
            Reduction::XorToOr => "xor2or",
        }
    }
}

/// One message: edges of a random graph, each with its mark bit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Message {
    pub edges: Vec<(u32, u32)>,
    pub marks: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dbhp {
    pub planted: Assignment,
    pub messages: Vec<Message>,
}

impl Dbhp {
    pub fn marked_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.messages
            .iter()
            .flat_map(|msg| msg.edges.iter().zip(&msg.marks).filter(|(_, &w)| w).map(|(&e, _)| e))
    }
}

#[derive(Debug, Clone)]
pub struct GapInstance {
    pub formula: Formula,
    pub planted: Assignment,
    pub case: Case,
    pub reduction: Reduction,
    pub params: DbhpParams,
    pub m_dbhp: u64,
    pub marked: Vec<(u32, u32)>,
}

/// Uniform `X*` conditioned on both sides being nonempty.
fn planted_partition(n: u32, rng: &mut impl Rng) -> Assignment {
    loop {
        let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        if bits.iter().any(|&b| b) && !bits.iter().all(|&b| b) {
            return Assignment::new(bits);
        }
    }
}

/// Edges of `G(n, p)` without self-loops, in lexicographic order.
fn random_graph(n: u32, p: f64, rng: &mut impl Rng) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    if p <= 0.0 {
        return edges;
    }
    let skip = Geometric::new(p).expect("probability in (0, 1]");
    let (mut i, mut offset) = (1u32, 0u64);
    loop {
        let mut s = skip.sample(rng);
        loop {
            if i >= n {
                return edges;
            }
            let row = u64::from(n - i);
            if offset + s < row {
                offset += s;
                break;
            }
            s -= row - offset;
            i += 1;
            offset = 0;
        }
        edges.push((i, i + 1 + offset as u32));
        offset += 1;
    }
}

fn dbhp_with(params: &DbhpParams, case: Case, rng: &mut impl Rng) -> Result<Dbhp, GapError> {
    params.validate()?;
    let planted = planted_partition(params.n, rng);
    let p = params.edge_probability();
    let messages = (0..params.t)
        .map(|_| {
            let edges = random_graph(params.n, p, rng);
            let marks = edges
                .iter()
                .map(|&(i, j)| {
                    let crosses = planted.get(i) != planted.get(j);
                    match case {
                        Case::Yes => crosses,
                        Case::No => !crosses,
                    }
                })
                .collect();
            Message { edges, marks }
        })
        .collect();
    Ok(Dbhp { planted, messages })
}

pub fn gen_dbhp(params: &DbhpParams, case: Case) -> Result<Dbhp, GapError> {
    dbhp_with(params, case, &mut ChaCha8Rng::seed_from_u64(params.seed))
}

fn sides(planted: &Assignment) -> Result<(Vec<u32>, Vec<u32>), GapError> {
    let n = planted.len() as u32;
    let (inside, outside): (Vec<u32>, Vec<u32>) = (1..=n).partition(|&v| planted.get(v));
    if inside.is_empty() || outside.is_empty() {
        return Err(GapError::DegeneratePartition);
    }
    Ok((inside, outside))
}

fn pick(xs: &[u32], rng: &mut impl Rng) -> u32 {
    xs[rng.random_range(0..xs.len())]
}

fn push(formula: &mut Formula, clause: Clause) {
    formula.push(clause).expect("generated variables are within n");
}

/// `⌊βnT/4⌋` planted `(x_i ∧ ¬x_j)` clauses plus `(x_i ∧ ¬x_j), (¬x_i ∧ x_j)`
/// for every marked edge.
pub fn reduce_eand(dbhp: &Dbhp, params: &DbhpParams, rng: &mut impl Rng) -> Result<Formula, GapError> {
    let (inside, outside) = sides(&dbhp.planted)?;
    let mut f = Formula::new(params.n);
    let alice = (params.budget() / 4.0).floor() as u64;
    for _ in 0..alice {
        let (i, j) = (pick(&inside, rng), pick(&outside, rng));
        push(&mut f, Clause::and2(Literal::pos(i), Literal::neg(j)));
    }
    for (i, j) in dbhp.marked_edges() {
        push(&mut f, Clause::and2(Literal::pos(i), Literal::neg(j)));
        push(&mut f, Clause::and2(Literal::neg(i), Literal::pos(j)));
    }
    Ok(f)
}

/// `⌊((√2−1)/2)βnT⌋` units `(x_i)` inside `X*` and as many `(¬x_j)` outside,
/// plus `(x_i ∨ x_j), (¬x_i ∨ ¬x_j)` for every marked edge.
pub fn reduce_or(dbhp: &Dbhp, params: &DbhpParams, rng: &mut impl Rng) -> Result<Formula, GapError> {
    let (inside, outside) = sides(&dbhp.planted)?;
    let mut f = Formula::new(params.n);
    let units = ((std::f64::consts::SQRT_2 - 1.0) / 2.0 * params.budget()).floor() as u64;
    for _ in 0..units {
        push(&mut f, Clause::unit(Literal::pos(pick(&inside, rng))));
    }
    for _ in 0..units {
        push(&mut f, Clause::unit(Literal::neg(pick(&outside, rng))));
    }
    for (i, j) in dbhp.marked_edges() {
        push(&mut f, Clause::or([Literal::pos(i), Literal::pos(j)]));
        push(&mut f, Clause::or([Literal::neg(i), Literal::neg(j)]));
    }
    Ok(f)
}

/// Replaces every `a ⊕ b` by `(a ∨ b), (¬a ∨ ¬b)`; the optimum grows by
/// exactly the clause count.
pub fn xor_to_or(xor: &Formula) -> Result<Formula, GapError> {
    let mut f = Formula::new(xor.n());
    for (k, c) in xor.clauses().iter().enumerate() {
        if c.kind() != ClauseKind::Xor2 {
            return Err(GapError::NotXor(k));
        }
        let [a, b] = [c.literals()[0], c.literals()[1]];
        push(&mut f, Clause::or([a, b]));
        push(&mut f, Clause::or([a.negate(), b.negate()]));
    }
    Ok(f)
}

/// Generates a full instance: partition, messages and the chosen reduction.
pub fn generate(params: &DbhpParams, case: Case, reduction: Reduction) -> Result<GapInstance, GapError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let dbhp = dbhp_with(params, case, &mut rng)?;
    let marked: Vec<(u32, u32)> = dbhp.marked_edges().collect();
    let formula = match reduction {
        Reduction::Eand => reduce_eand(&dbhp, params, &mut rng)?,
        Reduction::Or => reduce_or(&dbhp, params, &mut rng)?,
        Reduction::XorToOr => {
            let mut xor = Formula::new(params.n);
            for &(i, j) in &marked {
                push(&mut xor, Clause::xor2(Literal::pos(i), Literal::pos(j)));
            }
            xor_to_or(&xor)?
        }
    };
    Ok(GapInstance {
        formula,
        planted: dbhp.planted,
        case,
        reduction,
        params: *params,
        m_dbhp: marked.len() as u64,
        marked,
    })
}

/// Marked edges split by `sigma` whose endpoints lie on the same side of `X*`.
pub fn m_cross(instance: &GapInstance, sigma: &Assignment) -> u64 {
    let x = &instance.planted;
    instance
        .marked
        .iter()
        .filter(|&&(i, j)| sigma.get(i) != sigma.get(j) && x.get(i) == x.get(j))
        .count() as u64
}
