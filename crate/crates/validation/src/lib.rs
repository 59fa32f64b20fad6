//! Test-only package. The `acceptance` target checks the whole pipeline,
//! from operator identities to Monte Carlo trends, at fixed seeds.
