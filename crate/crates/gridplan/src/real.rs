use serde::de::DeserializeOwned;
use serde::Serialize;

/// Scalar type the whole planning stack is generic over: f32 or f64.
/// Extends the solver's scalar with what file I/O and concurrent scenario
/// runs need.
pub trait Real: linprog::Scalar + Serialize + DeserializeOwned + Send + Sync {}

impl<T> Real for T where T: linprog::Scalar + Serialize + DeserializeOwned + Send + Sync {}
