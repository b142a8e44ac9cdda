"""Moving-boundary swelling model: solver and verification harness."""
