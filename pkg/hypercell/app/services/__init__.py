# Empty file to mark as Python package
