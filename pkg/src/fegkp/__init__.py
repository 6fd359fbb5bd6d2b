"""Free-electron control of photonic GKP qubits."""
