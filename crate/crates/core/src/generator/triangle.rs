use crate::instance::Instance;

/// Triples `(i, l, j)` per machine with `b[i][l] + b[l][j] < b[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleReport {
    pub violations: Vec<Vec<(usize, usize, usize)>>,
}

impl TriangleReport {
    pub fn every_machine_violated(&self) -> bool {
        self.violations.iter().all(|v| !v.is_empty())
    }

    pub fn total(&self) -> usize {
        self.violations.iter().map(Vec::len).sum()
    }
}

pub fn verify_nontriangular(inst: &Instance) -> TriangleReport {
    let n = inst.n;
    let violations = inst
        .setup_time
        .iter()
        .map(|b| {
            let mut found = Vec::new();
            for i in 0..n {
                for l in 0..n {
                    for j in 0..n {
                        if i != l && l != j && i != j && b[i][l] + b[l][j] < b[i][j] {
                            found.push((i, l, j));
                        }
                    }
                }
            }
            found
        })
        .collect();
    TriangleReport { violations }
}
