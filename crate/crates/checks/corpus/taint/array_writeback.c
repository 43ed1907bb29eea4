int fill(char dst[], int fd) {
    read(fd, dst, 32); // source:a
    return 0;
}

int main(int fd) {
    char buf[32];
    fill(buf, fd);
    system(buf); // sink:a
    return 0;
}
