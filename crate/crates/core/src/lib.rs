//! Exact lattice, tropical and intersection-theoretic machinery for counting
//! primitive tropical cylinders on blowups of smooth toric surfaces.
//!
//! The modules build on each other in order: [`lattice`] and [`model`] give
//! the toric data, [`classes`] the curve-class lattice, [`walls`] the wall
//! structure, [`tropical`] the mapped trees and cylinders, [`counting`] the
//! closed-form count with its oracles, and [`deformation`] the families used
//! to replay the inductive argument.

pub mod classes;
pub mod counting;
pub mod deformation;
pub mod fixtures;
pub mod lattice;
pub mod model;
pub mod tropical;
pub mod walls;

pub use classes::{
    class_from_profile, compatibility_from_weights, compatibility_intersections, intersect,
    lift_profile, pair, pullback_class, toric_intersection_matrix, translate_class, ClassError,
    CurveClass, IntersectionProfile,
};
pub use counting::{
    choice_class, choices, contributing_classes, count_primitive_cylinder, count_spine,
    elementary_class, elementary_count, splitting_sum, twig_free_class, ClassKind, Contribution,
    CountError, CountResult, ElementaryCountTable, ElementaryCounts, Splitting,
};
pub use deformation::{
    build_deformation, degeneration_path, extension_ledger, replay_induction, AbstractTree,
    Anchors, Branch, DeformationData, DeformationError, ExtensionLedger, FamilyCounts, FamilyCurve,
    FamilyTag, IndexSets, ReplayReport, StepCheck,
};
pub use lattice::{
    cone_coordinates, norm, refine_fan, validate_fan, validate_fan_with_offset, ConeCoordinates,
    Fan, FanError, LatticeVector, Refinement,
};
pub use model::{
    build_model, ensure_rays, exceptional_directions, refine_model, ExceptionalDirection,
    ModelError, ModelRefinement, ToricModel,
};
pub use tropical::{
    classify, extend_spine, extension_class, spine_decomposition, tropical_line, Classification,
    CylinderError, MappedTree, Point, PrimitiveCylinder, Q,
};
pub use walls::{
    generate_walls, generate_walls_with_rule, is_wall_direction, Wall, WallError, WallRule,
    WallStructure,
};
