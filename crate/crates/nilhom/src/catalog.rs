//! Built-in examples with their expected verdicts.

use nilhom_core::algebra::{examples, CheckFailure, LieAlgebra};
use nilhom_core::matrix::{Matrix, RealMatrix};
use nilhom_core::spectral::lambda_pow;

#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Derivation(RealMatrix),
    /// `δ` together with its dilation factor.
    Automorphism {
        matrix: RealMatrix,
        lambda: f64,
    },
}

impl Operator {
    pub fn kind(&self) -> &'static str {
        match self {
            Operator::Derivation(_) => "derivation",
            Operator::Automorphism { .. } => "automorphism",
        }
    }

    pub fn check(&self, g: &LieAlgebra) -> Result<(), CheckFailure> {
        match self {
            Operator::Derivation(a) => g.check_derivation(a, 1e-9),
            Operator::Automorphism { matrix, .. } => g.check_automorphism(matrix, 1e-9),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedOperator {
    pub name: String,
    pub operator: Operator,
}

/// Verdict shared by every operator of an entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub answer: bool,
    pub hausdorff_dimension: f64,
}

#[derive(Debug, Clone)]
pub struct ExampleCatalogEntry {
    pub name: &'static str,
    pub algebra: LieAlgebra,
    /// The first operator is the default one.
    pub operators: Vec<NamedOperator>,
    pub expected: Expected,
}

impl ExampleCatalogEntry {
    /// A derivation together with its flows `λ^A` at `λ = 2` and `λ = 1/2`.
    fn new(
        name: &'static str,
        algebra: LieAlgebra,
        derivation: &'static str,
        a: RealMatrix,
        expected: Expected,
    ) -> Self {
        let mut operators =
            vec![NamedOperator { name: derivation.to_string(), operator: Operator::Derivation(a.clone()) }];
        for (suffix, lambda) in [("2", 2.0), ("0.5", 0.5)] {
            let matrix = lambda_pow(&a, lambda).expect("catalog derivations have convergent flows");
            operators.push(NamedOperator {
                name: format!("{derivation}@{suffix}"),
                operator: Operator::Automorphism { matrix, lambda },
            });
        }
        let entry = Self { name, algebra, operators, expected };
        if let Err((op, e)) = entry.validate() {
            panic!("catalog entry {name}: operator {op}: {e}");
        }
        entry
    }

    pub fn operator(&self, name: &str) -> Option<&NamedOperator> {
        self.operators.iter().find(|o| o.name == name)
    }

    pub fn derivation(&self) -> &RealMatrix {
        match &self.operators[0].operator {
            Operator::Derivation(a) => a,
            Operator::Automorphism { .. } => unreachable!("entries start with a derivation"),
        }
    }

    /// Leibniz and homomorphism identities of every operator.
    pub fn validate(&self) -> Result<(), (String, CheckFailure)> {
        for op in &self.operators {
            op.operator.check(&self.algebra).map_err(|e| (op.name.clone(), e))?;
        }
        Ok(())
    }
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> RealMatrix {
    Matrix::from_row_slice(2, 2, &[a, b, c, d])
}

fn yes(q: f64) -> Expected {
    Expected { answer: true, hausdorff_dimension: q }
}

fn no(q: f64) -> Expected {
    Expected { answer: false, hausdorff_dimension: q }
}

pub fn catalog() -> Vec<ExampleCatalogEntry> {
    let r2 = || LieAlgebra::abelian(2);
    vec![
        ExampleCatalogEntry::new(
            "heisenberg",
            examples::heisenberg(),
            "standard",
            Matrix::diagonal(&[1.0, 1.0, 2.0]),
            yes(4.0),
        ),
        ExampleCatalogEntry::new("r2-shear-weight1", r2(), "shear", m2(1.0, 1.0, 0.0, 1.0), no(2.0)),
        ExampleCatalogEntry::new("r2-shear-1.5", r2(), "shear", m2(1.5, 1.0, 0.0, 1.5), yes(3.0)),
        ExampleCatalogEntry::new("r2-spiral", r2(), "spiral", m2(2.0, -1.0, 1.0, 2.0), yes(4.0)),
        ExampleCatalogEntry::new("r2-conformal", r2(), "conformal", m2(1.0, -1.0, 1.0, 1.0), yes(2.0)),
        ExampleCatalogEntry::new("r2-diag-0.5-2", r2(), "diag", m2(0.5, 0.0, 0.0, 2.0), no(2.5)),
        ExampleCatalogEntry::new(
            "rototranslation",
            examples::rototranslation(),
            "diag110",
            Matrix::diagonal(&[1.0, 1.0, 0.0]),
            no(2.0),
        ),
        ExampleCatalogEntry::new(
            "engel",
            examples::engel(),
            "standard",
            Matrix::diagonal(&[1.0, 1.0, 2.0, 3.0]),
            yes(7.0),
        ),
    ]
}

pub fn entry(name: &str) -> Option<ExampleCatalogEntry> {
    catalog().into_iter().find(|e| e.name == name)
}
