"""Six-class emotion classifier: fine-tuning and batch scoring of post text."""

__version__ = "0.1.0"

CLASSES = ("joy", "sadness", "anger", "fear", "surprise", "neutral")
