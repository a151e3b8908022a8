"""Dynamic term-modal logic for epistemic social networks."""
