import sys
from pathlib import Path

# Make src/ importable the way the CLI sees it
sys.path.insert(0, str(Path(__file__).parent / "src"))
