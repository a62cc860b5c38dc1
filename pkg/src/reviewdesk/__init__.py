"""reviewdesk: scaffolding backend for writing academic peer reviews.

Turns an uploaded paper PDF into a coordinate-anchored document, serves
contextual reflection cues and in-situ citation knowledge while the reviewer
annotates, and synthesizes tagged notes into a review outline whose every
bullet traces back to notes and PDF rectangles.
"""

__version__ = "0.1.0"
