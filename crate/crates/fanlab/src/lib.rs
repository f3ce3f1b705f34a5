//! Certified arithmetic and verification machinery for an exponential
//! skew-product model: tower-scale numbers, itinerary sequences, escape
//! heights, strata membership, and the approximation construction.

pub mod itinerary;
pub mod tower;
