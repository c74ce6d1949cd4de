use std::io::Write;

/// Monotonic stopwatch; reads zero on targets without a clock.
#[derive(Clone, Copy, Debug)]
pub struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub fn elapsed_seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

/// One proximal step of a solver.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `‖x^k − x★‖ / ‖x★‖` (absolute when the reference is zero).
    pub err_to_ref: Option<f64>,
    pub step_norm: f64,
    pub objective: f64,
    pub support: Vec<usize>,
    /// Signs of the entries listed in `support`, in the same order.
    pub signs: Vec<i8>,
    pub prox_calls: u64,
    pub elapsed_seconds: f64,
}

impl IterationRecord {
    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    fn same_pattern(&self, other: &IterationRecord) -> bool {
        self.support == other.support && self.signs == other.signs
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

pub const TRACE_CSV_HEADER: &str = "iter,err_to_ref,step_norm,objective,support_size,prox_calls,elapsed_seconds";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn errors(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.err_to_ref).collect()
    }

    pub fn step_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.step_norm).collect()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    /// First index from which support and sign pattern never change again.
    pub fn stabilization_index(&self) -> usize {
        let n = self.records.len();
        if n == 0 {
            return 0;
        }
        let last = &self.records[n - 1];
        let mut k = n - 1;
        while k > 0 && self.records[k - 1].same_pattern(last) {
            k -= 1;
        }
        k
    }

    /// Whether support and signs are identical over the final `window` records.
    pub fn pattern_constant_over_last(&self, window: usize) -> bool {
        let n = self.records.len();
        n >= window && n - self.stabilization_index() >= window
    }

    /// First record whose reference error is at most `level`.
    pub fn first_reaching(&self, level: f64) -> Option<&IterationRecord> {
        self.records.iter().find(|r| r.err_to_ref.is_some_and(|e| e <= level))
    }

    pub fn write_csv<W: Write>(&self, mut out: W, include_time: bool) -> std::io::Result<()> {
        if include_time {
            writeln!(out, "{TRACE_CSV_HEADER}")?;
        } else {
            writeln!(out, "iter,err_to_ref,step_norm,objective,support_size,prox_calls")?;
        }
        for r in &self.records {
            let err = r.err_to_ref.map(format_float).unwrap_or_default();
            write!(
                out,
                "{},{},{},{},{},{}",
                r.iter,
                err,
                format_float(r.step_norm),
                format_float(r.objective),
                r.support.len(),
                r.prox_calls
            )?;
            if include_time {
                write!(out, ",{}", format_float(r.elapsed_seconds))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub(crate) fn support_and_signs(x: &[f64]) -> (Vec<usize>, Vec<i8>) {
    let mut support = Vec::new();
    let mut signs = Vec::new();
    for (i, &v) in x.iter().enumerate() {
        if v != 0.0 {
            support.push(i);
            signs.push(if v > 0.0 { 1 } else { -1 });
        }
    }
    (support, signs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iter: usize, x: &[f64], err: f64) -> IterationRecord {
        let (support, signs) = support_and_signs(x);
        IterationRecord {
            iter,
            err_to_ref: Some(err),
            step_norm: 0.1,
            objective: 1.0,
            support,
            signs,
            prox_calls: iter as u64,
            elapsed_seconds: 0.0,
        }
    }

    #[test]
    fn stabilization() {
        let t = IterationTrace {
            records: vec![
                rec(1, &[1.0, 0.0, 1.0], 1.0),
                rec(2, &[1.0, 0.0, -1.0], 0.5),
                rec(3, &[2.0, 0.0, -1.0], 0.25),
                rec(4, &[3.0, 0.0, -2.0], 0.125),
            ],
        };
        assert_eq!(t.stabilization_index(), 1);
        assert!(t.pattern_constant_over_last(3));
        assert!(!t.pattern_constant_over_last(4));
        assert_eq!(t.first_reaching(0.3).unwrap().iter, 3);
    }

    #[test]
    fn csv_layout() {
        let t = IterationTrace { records: vec![rec(1, &[1.0, 0.0], 0.5)] };
        let mut buf = Vec::new();
        t.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_CSV_HEADER);
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.5);
        assert_eq!(row[4], "1");
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
