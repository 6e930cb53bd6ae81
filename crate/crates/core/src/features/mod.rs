//! Feature-construction pipeline: similarity graphs over binary columns,
//! community structure, and sparse logistic feature selection.

mod communities;
mod graph;
mod lasso;

pub use communities::{spectral_communities, Communities};
pub use graph::{
    connected_components, cosine_graph, BinaryMatrix, Partition, SimilarityGraph,
};
pub use lasso::{
    cv_select, default_lambda_min_ratio, lasso_path, lasso_path_at, stratified_folds,
    CvSelection, LassoPath,
};
