pub mod assemble;
pub mod error;
pub mod extract;
pub mod generate;
pub mod llm;
pub mod miner;
pub mod ml;
pub mod prompt;
pub mod structured;

pub use assemble::{assemble_schema, build_schema, Part};
pub use error::{AssemblyError, GenerationError};
pub use generate::{extract_shex, generate_end_to_end, generate_global, CardinalitySource, GlobalOptions, Generated, DEFAULT_MAX_REPAIRS};
pub use llm::{
    write_exchange, Exchange, FnClient, HttpChatClient, LlmClient, LlmError, ProviderConfig, RecordingClient, ResponseFormat,
    ScriptedClient, StubClient,
};
pub use miner::{mine_baseline_schema, MinerThresholds};
pub use ml::{evaluate_cardinality_accuracy, train, Accuracy, CardinalityModel, ModelKind, TrainParams};
pub use prompt::{
    build_global_prompt, build_local_prompt, build_triples_prompt, ChatPrompt, ClassInfo, Exemplar, Exemplars, InstanceSample,
    Message, PromptError, PromptSetting,
};
pub use structured::{predict_cardinality_structured, predict_node_constraint_structured, StructuredCardinality, StructuredNodeConstraint};
