import os
import tempfile

# Keep the user's ~/.couettelab untouched while testing
os.environ.setdefault("COUETTELAB_PATH", tempfile.mkdtemp(prefix="couettelab-"))
