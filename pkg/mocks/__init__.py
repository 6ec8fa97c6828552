"""Independent reference models used as test oracles."""
