//! Instances shared by the criterion suites.

use ntlot_core::{generate, ClassSpec, Instance};

/// A generated instance of `class` with every setup cap set to `q`, which
/// keeps it within reach of the enumeration oracle for small sizes.
pub fn capped(class: &str, seed: u64, q: u32) -> Instance {
    let spec: ClassSpec = class.parse().expect("valid class name");
    let mut inst = generate(&spec, seed).expect("class generates");
    inst.setup_cap = Some(vec![vec![vec![q; inst.p]; inst.m]; inst.n]);
    inst
}

/// A catalog-sized instance with default caps.
pub fn catalog(class: &str, seed: u64) -> Instance {
    let spec = ntlot_core::generator::catalog_class(class).expect("catalog class");
    generate(&spec, seed).expect("class generates")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(capped("Data2-3-3-0.8-50-80-20", 1, 1).n, 3);
        assert_eq!(catalog("Data2-15-5-0.8-50-80-20", 1).m, 2);
    }
}
