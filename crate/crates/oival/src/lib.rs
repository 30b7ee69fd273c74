pub mod construct;
pub mod covers;
pub mod hitting;
pub mod select;
pub mod seqcore;
