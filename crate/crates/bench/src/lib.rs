//! Shared fixtures for the criterion benches.

use pdc_core::{IndexPolicy, Method, Structure};

/// Sampler configurations timed at each size: every method with its
/// default index set, plus the recursive method at two more.
pub fn sampler_cells(structure: Structure, n: usize) -> Vec<(Method, Option<IndexPolicy>)> {
    let mut cells = vec![(Method::Hard, None), (Method::Dsh, None), (Method::PdcRecursive, None)];
    let root = (n as f64).sqrt().ceil() as usize;
    match structure {
        Structure::SetPartitions | Structure::Assembly => {
            cells.push((Method::PdcRecursive, Some(IndexPolicy::Window(2.0))));
        }
        _ => {
            cells.push((Method::PdcRecursive, Some(IndexPolicy::Prefix(2 * root))));
        }
    }
    if structure == Structure::Partitions {
        cells.push((Method::Euler, None));
    }
    cells
}

/// A short label for a cell.
pub fn label(method: Method, policy: Option<IndexPolicy>) -> String {
    match policy {
        Some(p) => format!("{method}/{p}"),
        None => method.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_only_for_partitions() {
        assert!(sampler_cells(Structure::Partitions, 100).iter().any(|c| c.0 == Method::Euler));
        assert!(!sampler_cells(Structure::SetPartitions, 100).iter().any(|c| c.0 == Method::Euler));
        assert_eq!(label(Method::PdcRecursive, Some(IndexPolicy::Prefix(20))), "pdc-recursive/prefix:20");
    }
}
