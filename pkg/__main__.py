# File: __main__.py
# Menjalankan CLI sebagai module: python -m hjortic

from .main import main

if __name__ == "__main__":
    main()
