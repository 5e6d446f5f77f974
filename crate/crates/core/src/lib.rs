//! Exact construction and verification of group-graded matrix algebras over prime fields.

pub mod artifact;
pub mod error;
pub mod field;
pub mod forms;
pub mod graded;
pub mod group;
pub mod isoclass;
pub mod lie;
pub mod linalg;
pub mod pauli;
pub mod sweep;

pub use artifact::{verify_artifact, Artifact, VerifyReport};
pub use error::{Error, Result};
pub use field::{Fp, RootField};
pub use forms::{InvolutionData, InvolutionKind, MuMap};
pub use graded::{verify_grading, Decomposition, Fingerprint, GradedMatrixAlgebra, GradingReport, KappaMap, Product};
pub use group::{Bicharacter, Character, CosetTable, Elem, FinAbGroup, Subgroup, SymplecticBasis};
pub use isoclass::{
    build, census, decide, default_field, verify_witness, Census, IsoDecision, Kind, ParamSpec, ParamTuple,
    Realization, Verdict,
};
pub use lie::{verify_lie, GradedLieAlgebra, LieFamily, LieReport};
pub use linalg::{Matrix, SparseMatrix, SparseVec, Subspace};
pub use pauli::PauliAlgebra;
