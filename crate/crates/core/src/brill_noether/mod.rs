//! Gonality and Brill–Noether constructions on metric graphs: fixtures,
//! lcm pencils on wedges and joins, lattice searches, and structural
//! verdicts.

pub mod fixtures;
pub mod search;
pub mod verdict;
pub mod witness;

pub use fixtures::{build_fixture, Fixture, FixtureSpec, Part, PartSpec};
pub use search::{
    bn_rank_lattice, gonality_search_lattice, pencil_through, reduced_effective, w1_family_probe, BnRankReport,
    EvidenceLevel, FamilyProbe, GonalitySearch,
};
pub use verdict::{multitree_verdict, MultitreeVerdict, Obstruction};
pub use witness::{
    join_family, join_gonality_witness, maximal_gonality, part_grid, pencil_lcm, wedge_exception_family,
    wedge_gonality_witness, Construction, GonalityVerdict, GonalityWitness, WitnessOptions, WitnessReport,
};
