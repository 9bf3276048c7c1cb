/// One outer iteration as seen by the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// `||x - x*||_2` when a reference saddle is known.
    pub err: Option<f64>,
    pub grad_norm: f64,
    pub energy: f64,
    /// Nanoseconds since the start of the run loop.
    pub wall_ns: u64,
}

/// Per-iteration records, strictly increasing in `iter`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record.
    ///
    /// # Panics
    ///
    /// If `rec.iter` does not exceed the last stored iteration.
    pub fn push(&mut self, rec: TraceRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                rec.iter > last.iter,
                "trace iterations must increase: {} after {}",
                rec.iter,
                last.iter
            );
        }
        self.records.push(rec);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Every `every`-th record, always keeping the final one.
    pub fn downsample(&self, every: usize) -> IterationTrace {
        let every = every.max(1);
        let n = self.records.len();
        let records = self
            .records
            .iter()
            .enumerate()
            .filter(|(i, _)| i % every == 0 || *i + 1 == n)
            .map(|(_, r)| *r)
            .collect();
        IterationTrace { records }
    }
}

impl FromIterator<TraceRecord> for IterationTrace {
    fn from_iter<T: IntoIterator<Item = TraceRecord>>(iter: T) -> Self {
        let mut trace = IterationTrace::new();
        for rec in iter {
            trace.push(rec);
        }
        trace
    }
}
