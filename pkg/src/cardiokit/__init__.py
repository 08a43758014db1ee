"""cardiokit: heart-disease prognosis pipeline.

Data curation, variance-ratio attribute ranking, expert/automatic feature
fusion, five classical classifiers, K-fold evaluation with ROC/AUC, an
experiment grid runner and an HTTP prediction service.
"""

__version__ = "0.1.0"
