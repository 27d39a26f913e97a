use super::Formula;

/// Per-arity clause counts and signed occurrence counts.
///
/// Arity counts literal slots, so `(x ∧ x)` is a 2-clause with two
/// positive occurrences of `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaStats {
    n: u32,
    m: Vec<u64>,
    pos: Vec<Vec<u64>>,
    neg: Vec<Vec<u64>>,
}

impl FormulaStats {
    /// Largest clause arity present (0 for an empty formula).
    pub fn k(&self) -> usize {
        self.m.len()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of clauses with exactly `j` literal slots.
    pub fn m(&self, j: usize) -> u64 {
        j.checked_sub(1).and_then(|j| self.m.get(j)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.m.iter().sum()
    }

    pub fn pos(&self, var: u32, j: usize) -> u64 {
        Self::lookup(&self.pos, var, j)
    }

    pub fn neg(&self, var: u32, j: usize) -> u64 {
        Self::lookup(&self.neg, var, j)
    }

    fn lookup(table: &[Vec<u64>], var: u32, j: usize) -> u64 {
        let Some(row) = j.checked_sub(1).and_then(|j| table.get(j)) else {
            return 0;
        };
        var.checked_sub(1)
            .and_then(|i| row.get(i as usize))
            .copied()
            .unwrap_or(0)
    }
}

pub fn stats(formula: &Formula) -> FormulaStats {
    let k = formula.max_arity();
    let n = formula.n() as usize;
    let mut out = FormulaStats {
        n: formula.n(),
        m: vec![0; k],
        pos: vec![vec![0; n]; k],
        neg: vec![vec![0; n]; k],
    };
    for c in formula.clauses() {
        let j = c.arity() - 1;
        out.m[j] += 1;
        for l in c.literals() {
            let side = if l.is_negated() { &mut out.neg } else { &mut out.pos };
            side[j][l.var() as usize - 1] += 1;
        }
    }
    out
}
