"""Sequential unsharp measurements and genuine tripartite entanglement."""
__version__ = "0.1.0"
