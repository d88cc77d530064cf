/// One checkpoint of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// Cumulative FO + IFO calls.
    pub calls: u64,
    /// Solver iteration, or outer round for Catalyst.
    pub iteration: usize,
    /// `‖∇Φ(x)‖` if the problem has a closed-form primal, otherwise NaN.
    pub grad_phi_norm: f64,
    /// Squared gradient norm of the problem being solved at this point.
    pub grad_sq: f64,
    pub wall_ms: f64,
}

/// Checkpoint history of a run; cumulative calls strictly increase except
/// that the first row may carry zero calls.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last_mut() {
            if last.calls == row.calls {
                *last = row;
                return;
            }
        }
        self.rows.push(row);
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn calls_strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].calls < w[1].calls)
    }

    /// First checkpoint whose `‖∇Φ‖` is at most `epsilon`.
    pub fn first_below(&self, epsilon: f64) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.grad_phi_norm <= epsilon)
    }
}
