pub mod analyze;
pub mod eval;
pub mod corpus;
pub mod graph;
pub mod suite;
pub mod synthetic;
pub mod train;

use viewfuse_core::corpus::Task;

pub(crate) fn suite_task_parser(s: &str) -> Result<Task, String> {
    Task::parse(s).ok_or_else(|| format!("unknown task `{s}` (user_type | motivation)"))
}
