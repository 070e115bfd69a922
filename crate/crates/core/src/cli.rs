//! Run configuration and orchestration. (under construction)
