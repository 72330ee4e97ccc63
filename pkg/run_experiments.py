from pathlib import Path
from dotenv import load_dotenv, find_dotenv
from src.adaptive_ssc.cli import app

env_path = Path(__file__).resolve().parent / ".env"
if env_path.exists():
	load_dotenv(dotenv_path=str(env_path), override=False)
else:
	alt = find_dotenv(usecwd=True)
	if alt:
		load_dotenv(alt, override=False)


if __name__ == "__main__":
	app()
