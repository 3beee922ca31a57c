# Dataset generation and corpus loading
