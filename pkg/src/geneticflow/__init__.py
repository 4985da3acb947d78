"""GeneticFlow: self-citation graph profiles of scholars for impact analysis."""

__version__ = "0.1.0"
