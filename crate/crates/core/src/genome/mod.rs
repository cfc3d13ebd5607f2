//! Patches over a module: copy/delete edits with recorded repairs, their
//! application, random mutation and messy crossover.

mod apply;
mod crossover;
mod edit;
mod mutate;
mod resize;

pub use apply::{apply_edit, apply_patch, ApplyError, Applied, EditOutcome, SkipReason};
pub use crossover::{crossover, CrossoverError, Offspring};
pub use edit::{copy_value, Binding, Edit, Patch, Rebind, UseSite};
pub use mutate::{
    choose_binding, mutate, propose_copy, propose_delete, repair_uses, FreshIds, MutationConfig, MutationError,
    RepairError,
};
pub use resize::{fresh_value, synthesize_resize, ResizeRecipe, ResizeStep};
